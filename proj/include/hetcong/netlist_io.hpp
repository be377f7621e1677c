#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hetcong/design.hpp"

namespace hetcong {

/// Parses the accepted DEF subset (see docs/def-subset.md). Skipped sections
/// are reported through `warnings` when it is non-null.
Design parse_def(std::string_view text, std::vector<std::string>* warnings = nullptr);

/// Parses the line-oriented JSON design format.
Design parse_canonical(std::string_view text);

/// Deterministic canonical serialization, ordered by id.
std::string emit_canonical(const Design& d);

/// Dispatches on the first non-blank character: '{' selects the canonical parser.
Design parse_design(std::string_view text, std::vector<std::string>* warnings = nullptr);

Design load_design(const std::string& path, std::vector<std::string>* warnings = nullptr);

}  // namespace hetcong
