#include "accsplit/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace accsplit::csv {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

void trace_row(std::ostringstream& os, const IterRecord& r) {
  os << r.k << ',' << format_number(r.objective) << ',' << format_number(r.residual) << ','
     << format_number(r.time_s);
}

}  // namespace

std::string trace_csv(const IterTrace& trace) {
  std::ostringstream os;
  os << kTraceHeader << '\n' << "k,objective,residual,time_s\n";
  for (const auto& r : trace.records) {
    trace_row(os, r);
    os << '\n';
  }
  return os.str();
}

std::string run_csv(const RunRecord& run) {
  std::ostringstream os;
  os << kRunHeader << '\n' << "k,objective,residual,time_s,rel_error\n";
  for (std::size_t i = 0; i < run.trace.records.size(); ++i) {
    trace_row(os, run.trace.records[i]);
    const double err = i < run.rel_error.size() ? run.rel_error[i] : std::nan("");
    os << ',' << format_number(err) << '\n';
  }
  return os.str();
}

std::string aggregate_csv(const RunReport& report) {
  std::ostringstream os;
  os << kAggregateHeader << '\n'
     << "variant,mean_iters,std_iters,mean_final_error,std_final_error\n";
  for (const auto& s : report.summary) {
    os << s.variant << ',' << format_number(s.mean_iters) << ',' << format_number(s.std_iters)
       << ',' << format_number(s.mean_final_error) << ',' << format_number(s.std_final_error)
       << '\n';
  }
  return os.str();
}

std::string stages_csv(const RunReport& report) {
  std::ostringstream os;
  os << kStagesHeader << '\n' << "variant,seed,stage,alpha,iterations,final_error,status\n";
  for (const auto& run : report.runs) {
    for (std::size_t j = 0; j < run.stages.size(); ++j) {
      const auto& st = run.stages[j];
      os << run.variant << ',' << run.seed << ',' << j << ',' << format_number(st.alpha) << ','
         << st.iterations << ',' << format_number(st.final_error) << ','
         << to_string(st.status) << '\n';
    }
  }
  return os.str();
}

std::string order_csv(const OrderResult& result) {
  std::ostringstream os;
  os << kOrderHeader << '\n' << "h,error,in_window\n";
  for (std::size_t i = 0; i < result.h.size(); ++i) {
    os << format_number(result.h[i]) << ',' << format_number(result.error[i]) << ','
       << (result.in_window[i] ? 1 : 0) << '\n';
  }
  os << "# slope=" << format_number(result.fit.slope)
     << " intercept=" << format_number(result.fit.intercept)
     << " r2=" << format_number(result.fit.r2) << '\n';
  return os.str();
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  std::random_device rd;
  const fs::path tmp =
      dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd() % 1000000));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot move output into place at " + path.string());
  }
}

}  // namespace accsplit::csv
