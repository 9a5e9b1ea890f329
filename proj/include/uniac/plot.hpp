#pragma once

#include <string>
#include <vector>

#include "uniac/train.hpp"

namespace uniac {

struct RunLog {
  std::string dir;
  std::string name;  // config/cell name
  std::string env;
  std::uint64_t seed = 0;
  std::vector<TrainLogRecord> records;
};

RunLog read_run_dir(const std::string& dir);

// Per-environment learning-curve SVGs (seed-mean with a +-std band) plus a
// markdown summary table of final returns in mean+-std form. Returns the
// paths written.
std::vector<std::string> emit_plots(const std::vector<std::string>& run_dirs,
                                    const std::string& out_dir);

}  // namespace uniac
