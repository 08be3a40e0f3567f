#include "odmr/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace odmr::csvio {

namespace {
void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  out += buf;
}
}  // namespace

std::string to_csv(const experiments::Trace& t) {
  std::string out;
  bool has_x = !t.x.empty();
  bool has_x2 = !t.x2.empty();
  if (has_x) {
    out += t.x_name.empty() ? "x" : t.x_name;
    out += ',';
  }
  if (has_x2) {
    out += t.x2_name.empty() ? "x2" : t.x2_name;
    out += ',';
  }
  out += t.y_name.empty() ? "y" : t.y_name;
  out += '\n';
  for (size_t i = 0; i < t.y.size(); ++i) {
    if (has_x) {
      append_number(out, t.x[i]);
      out += ',';
    }
    if (has_x2) {
      append_number(out, t.x2[i]);
      out += ',';
    }
    append_number(out, t.y[i]);
    out += '\n';
  }
  return out;
}

void write_csv(const std::string& path, const experiments::Trace& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << to_csv(t);
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace odmr::csvio
