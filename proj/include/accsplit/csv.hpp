#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "accsplit/experiments.hpp"
#include "accsplit/ode_lab.hpp"
#include "accsplit/solvers.hpp"

namespace accsplit::csv {

// First line of every file. Bump the version when the columns change.
inline constexpr std::string_view kTraceHeader = "# accsplit trace v1";
inline constexpr std::string_view kRunHeader = "# accsplit run v1";
inline constexpr std::string_view kAggregateHeader = "# accsplit aggregate v1";
inline constexpr std::string_view kStagesHeader = "# accsplit stages v1";
inline constexpr std::string_view kOrderHeader = "# accsplit order v1";
inline constexpr std::string_view kRatesHeader = "# accsplit rates v1";

/// Shortest text that reads back to the same double; "nan", "inf", "-inf"
/// for non-finite values.
std::string format_number(double v);

/// k,objective,residual,time_s
std::string trace_csv(const IterTrace& trace);

/// Trace columns plus rel_error.
std::string run_csv(const RunRecord& run);

/// variant,mean_iters,std_iters,mean_final_error,std_final_error
std::string aggregate_csv(const RunReport& report);

/// variant,seed,stage,alpha,iterations,final_error,status
std::string stages_csv(const RunReport& report);

/// h,error,in_window followed by a comment line with the fit.
std::string order_csv(const OrderResult& result);

/// Writes to a temporary file in the target directory and renames it over
/// `path`, creating parent directories as needed. Throws std::runtime_error.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace accsplit::csv
