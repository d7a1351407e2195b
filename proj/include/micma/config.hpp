#ifndef MICMA_CONFIG_HPP
#define MICMA_CONFIG_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "micma/space.hpp"

namespace micma {

/// Search-space wire format: an array with one object per dimension, each
/// either {"kind":"continuous"}, {"kind":"discrete","candidates":[...]}, or
/// the shorthand {"int_range":[lo,hi]}.
SearchSpace space_from_json(const nlohmann::json& dims);

/// "auto" (or empty) means the 1/(N*lambda) default; otherwise a number.
std::optional<double> parse_alpha(const std::string& text);

/// Seed base from the MI_CMAES_SEED_BASE environment variable, when set.
std::optional<std::uint64_t> env_seed_base();

}  // namespace micma

#endif
