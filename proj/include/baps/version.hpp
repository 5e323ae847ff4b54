// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace baps {

inline constexpr const char* kVersion = "0.1.0";

} // namespace baps
