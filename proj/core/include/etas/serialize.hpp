#pragma once

#include <filesystem>

#include <nlohmann/json_fwd.hpp>

#include "etas/inference.hpp"
#include "etas/model.hpp"
#include "etas/prior.hpp"

namespace etas {

[[nodiscard]] nlohmann::json params_to_json(const EtasParams& p);
[[nodiscard]] EtasParams params_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json priors_to_json(const PriorSpec& priors);
[[nodiscard]] PriorSpec priors_from_json(const nlohmann::json& j);

/// Full posterior summary: mode, precision, marginals, iteration trace, samples.
[[nodiscard]] nlohmann::json posterior_to_json(const PosteriorResult& r);
/// Restores the Gaussian approximation, priors, marginals and samples.
[[nodiscard]] PosteriorResult posterior_from_json(const nlohmann::json& j);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
[[nodiscard]] nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace etas
