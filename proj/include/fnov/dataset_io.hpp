#pragma once

#include "fnov/pde.hpp"

#include <filesystem>
#include <string>

namespace fnov {

std::string dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const std::string& text);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace fnov
