#include "msplit/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace msplit {

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);  // round-trip exact
  return buf;
}

void write_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << contents;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
  }
}

}  // namespace

std::string format_trace_row(const RunRow& row, bool with_aux) {
  std::ostringstream line;
  line << row.iter << ',' << format_double(row.obj_min) << ','
       << format_double(row.obj_sum) << ',' << format_double(row.relerr);
  if (with_aux) line << ',' << format_double(row.aux);
  line << ',' << format_double(row.elapsed_ms);
  return line.str();
}

void write_trace_csv(const RunRecord& record, const std::string& path) {
  std::ostringstream out;
  out << (record.has_aux ? "iter,obj_min,obj_sum,relerr,isnr,elapsed_ms"
                         : "iter,obj_min,obj_sum,relerr,elapsed_ms")
      << '\n';
  for (const auto& row : record.rows) {
    out << format_trace_row(row, record.has_aux) << '\n';
  }
  write_atomic(path, out.str());
}

void write_plot_data(const RunRecord& record, const std::string& prefix) {
  if (record.rows.empty()) throw std::invalid_argument("write_plot_data: empty trace");
  {
    std::ostringstream out;
    for (const auto& row : record.rows) {
      out << row.iter << ' ' << format_double(row.obj_min) << '\n';
    }
    write_atomic(prefix + "_obj.dat", out.str());
  }
  if (record.has_aux) {
    std::ostringstream out;
    for (const auto& row : record.rows) {
      out << row.iter << ' ' << format_double(row.aux) << '\n';
    }
    write_atomic(prefix + "_isnr.dat", out.str());
  }
}

}  // namespace msplit
