#pragma once

#include <skelgen/skeleton.hpp>
#include <skelgen/worldgen.hpp>

#include <filesystem>
#include <string>

namespace skelgen {

enum class ConfigFormat { Json, Toml };

/// .toml selects TOML, anything else JSON.
[[nodiscard]] ConfigFormat format_for(const std::filesystem::path& path);

/// Keys not present keep the value from `base`; unknown keys throw InputError.
/// TOML input is the flat subset `key = value` with optional `[section]`
/// headers (ignored), `#` comments, numbers, booleans, strings and arrays of
/// numbers.
[[nodiscard]] GenerationParams params_from_text(const std::string& text, ConfigFormat format,
                                                const GenerationParams& base = {});
[[nodiscard]] std::string params_to_text(const GenerationParams& params, ConfigFormat format);

[[nodiscard]] WorldSpec world_from_text(const std::string& text, ConfigFormat format,
                                        const WorldSpec& base = {});
[[nodiscard]] std::string world_to_text(const WorldSpec& spec, ConfigFormat format);

[[nodiscard]] GenerationParams load_params(const std::filesystem::path& path,
                                           const GenerationParams& base = {});
void save_params(const std::filesystem::path& path, const GenerationParams& params);

[[nodiscard]] WorldSpec load_world_spec(const std::filesystem::path& path,
                                        const WorldSpec& base = {});
void save_world_spec(const std::filesystem::path& path, const WorldSpec& spec);

}  // namespace skelgen
