#pragma once

// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <string>
#include <vector>

namespace eager {

using TokenId = int32_t;
using TokenList = std::vector<TokenId>;
using PromptId = std::string;

}  // namespace eager
