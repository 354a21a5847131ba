#pragma once

#include <string>

#include "core/dgp.hpp"

namespace rms {

// CSV with header x_1_1,...,x_1_d,...,x_J_d,y and raw 0/1 outcomes in y.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace rms
