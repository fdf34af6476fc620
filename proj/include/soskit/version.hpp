// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace soskit {

inline constexpr int version_major = 0;
inline constexpr int version_minor = 1;
inline constexpr int version_patch = 0;

inline constexpr const char* version_string() { return "0.1.0"; }

}  // namespace soskit
