#pragma once

#include <string>

#include "msplit/engine.hpp"

namespace msplit {

/// Trace CSV with header `iter,obj_min,obj_sum,relerr,elapsed_ms`
/// (an `isnr` column is inserted before `elapsed_ms` when the record carries
/// an aux metric).  All columns except elapsed_ms are deterministic for a
/// fixed config and seed.  Files are written atomically (write then rename).
void write_trace_csv(const RunRecord& record, const std::string& path);

/// Plot-ready two-column files: `<prefix>_obj.dat` with (iter, obj_min) and,
/// when the record carries an aux metric, `<prefix>_isnr.dat` with (iter, isnr).
void write_plot_data(const RunRecord& record, const std::string& prefix);

/// Serializes one run row as the CSV line write_trace_csv would emit.
std::string format_trace_row(const RunRow& row, bool with_aux);

}  // namespace msplit
