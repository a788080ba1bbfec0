#pragma once

#include <string>
#include <vector>

namespace egotopo {

// Full default configuration tree as JSON text. Every pipeline stage reads
// its block from here; file and flag overrides are merged on top.
std::string default_config_json();

// Deep-merges overrides into base. Unknown keys and mismatched value kinds
// are usage errors so typos never pass silently.
std::string merge_config_json(const std::string& base, const std::string& overrides);

// defaults -> overrides, validated. overrides may be empty.
std::string effective_config_json(const std::string& overrides);

struct ConfigKeyDoc {
  std::string key;          // dotted path
  std::string description;
};

// One entry per leaf config key, for CLI help.
std::vector<ConfigKeyDoc> config_key_docs();

}  // namespace egotopo
