#pragma once

#include <string>

#include "odmr/experiments.hpp"

namespace odmr::csvio {

// Full-precision scientific notation, one header row of column names.
std::string to_csv(const experiments::Trace& t);
void write_csv(const std::string& path, const experiments::Trace& t);

}  // namespace odmr::csvio
