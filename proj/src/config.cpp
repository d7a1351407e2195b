#include "micma/config.hpp"

#include <cstdlib>

#include "micma/errors.hpp"

namespace micma {

SearchSpace space_from_json(const nlohmann::json& dims) {
  if (!dims.is_array()) throw ConfigError("space: expected an array of dimension entries");
  std::vector<VariableSpec> specs;
  specs.reserve(dims.size());
  for (const auto& entry : dims) {
    if (!entry.is_object()) throw ConfigError("space: dimension entry must be an object");
    if (entry.contains("int_range")) {
      const auto& range = entry.at("int_range");
      if (!range.is_array() || range.size() != 2)
        throw ConfigError("space: int_range must be [lo, hi]");
      specs.push_back(VariableSpec::integer_range(range.at(0).get<long>(),
                                                  range.at(1).get<long>()));
      continue;
    }
    const std::string kind = entry.value("kind", "");
    if (kind == "continuous") {
      specs.push_back(VariableSpec::continuous());
    } else if (kind == "discrete") {
      if (!entry.contains("candidates"))
        throw ConfigError("space: discrete dimension needs candidates");
      specs.push_back(VariableSpec::discrete(entry.at("candidates").get<std::vector<double>>()));
    } else {
      throw ConfigError("space: unknown dimension kind '" + kind + "'");
    }
  }
  return SearchSpace(std::move(specs));
}

std::optional<double> parse_alpha(const std::string& text) {
  if (text.empty() || text == "auto") return std::nullopt;
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &consumed);
  } catch (const std::exception&) {
    throw ConfigError("alpha: expected a number or 'auto'");
  }
  if (consumed != text.size()) throw ConfigError("alpha: expected a number or 'auto'");
  return value;
}

std::optional<std::uint64_t> env_seed_base() {
  const char* raw = std::getenv("MI_CMAES_SEED_BASE");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0') throw ConfigError("MI_CMAES_SEED_BASE: expected an integer");
  return static_cast<std::uint64_t>(value);
}

}  // namespace micma
