#pragma once

namespace g2lab {

// Kernels that are data-parallel take an execution policy. Serial is the
// reference path; Parallel must produce bitwise-identical results.
enum class Exec { Serial, Parallel };

inline constexpr const char* kVersion = "1.0.0";

}  // namespace g2lab
