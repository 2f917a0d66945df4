#pragma once

#include "tsemos/models.hpp"

#include <filesystem>
#include <string>

namespace tsemos {

/// Deterministic JSON text of a fitted model; doubles round-trip exactly.
[[nodiscard]] std::string model_to_json(const FittedModel& model);
/// Throws ParseError on malformed input.
[[nodiscard]] FittedModel model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const FittedModel& model);
[[nodiscard]] FittedModel load_model(const std::filesystem::path& path);

}  // namespace tsemos
