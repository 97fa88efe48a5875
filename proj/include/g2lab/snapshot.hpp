#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "g2lab/thin_dirac.hpp"

namespace g2lab {

// Binary field snapshot, little-endian throughout:
//   "G2SG" | u32 version | i32 M, N2, N3 | f64 epsilon, alpha, beta
//   | f64 h[N2*N3] | (f64 re, f64 im) u[(M+1)*N2*N3] | same for v
// Samples are row-major in (j, a, b).
inline constexpr std::uint32_t kSnapshotVersion = 1;

struct Snapshot {
  SpinorGrid field;
  TwistedBundle twist;
  std::vector<double> h;
};

void write_snapshot(const std::string& path, const SpinorGrid& V, const TwistedBundle& twist,
                    const WarpProfile& warp);
Snapshot read_snapshot(const std::string& path);

}  // namespace g2lab
