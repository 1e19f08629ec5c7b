#pragma once

#include "fnov/fno.hpp"
#include "fnov/pln.hpp"

#include <filesystem>
#include <string>

namespace fnov {

/// Lossless text form of a binary64 value, e.g. "0x1.999999999999ap-4".
std::string hexfloat(double x);
double parse_hexfloat(const std::string& s);

std::string model_to_json(const FnoModel& model);
/// Throws std::runtime_error on malformed text or shape mismatch against
/// the declared spec.
FnoModel model_from_json(const std::string& text);

void save_model(const FnoModel& model, const std::filesystem::path& path);
FnoModel load_model(const std::filesystem::path& path);

std::string pln_to_json(const PlnNet& net, const std::string& name = "");
PlnNet pln_from_json(const std::string& text);

void save_pln(const PlnNet& net, const std::filesystem::path& path, const std::string& name = "");
PlnNet load_pln(const std::filesystem::path& path);

}  // namespace fnov
