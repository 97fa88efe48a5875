#include "g2lab/snapshot.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "g2lab/error.hpp"

namespace g2lab {

namespace {

template <class T>
void put(std::ostream& os, T value) {
  char b[sizeof(T)];
  std::memcpy(b, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(b, sizeof(T));
}

template <class T>
T get(std::istream& is) {
  char b[sizeof(T)];
  if (!is.read(b, sizeof(T))) throw PreconditionError("snapshot: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T value;
  std::memcpy(&value, b, sizeof(T));
  return value;
}

}  // namespace

void write_snapshot(const std::string& path, const SpinorGrid& V, const TwistedBundle& twist,
                    const WarpProfile& warp) {
  const auto& g = V.grid;
  require(warp.N2 == g.N2 && warp.N3 == g.N3, "snapshot: warp grid mismatch");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw PreconditionError("snapshot: cannot open " + path);
  os.write("G2SG", 4);
  put<std::uint32_t>(os, kSnapshotVersion);
  put<std::int32_t>(os, g.M);
  put<std::int32_t>(os, g.N2);
  put<std::int32_t>(os, g.N3);
  put(os, g.epsilon);
  put(os, twist.alpha);
  put(os, twist.beta);
  for (double x : warp.h) put(os, x);
  for (const auto* f : {&V.u, &V.v})
    for (const cplx& z : *f) {
      put(os, z.real());
      put(os, z.imag());
    }
  if (!os) throw PreconditionError("snapshot: write failed for " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw PreconditionError("snapshot: cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "G2SG", 4) != 0) throw PreconditionError("snapshot: bad magic");
  if (get<std::uint32_t>(is) != kSnapshotVersion) throw PreconditionError("snapshot: unsupported version");
  ThinCylinderGrid g;
  g.M = get<std::int32_t>(is);
  g.N2 = get<std::int32_t>(is);
  g.N3 = get<std::int32_t>(is);
  g.epsilon = get<double>(is);
  g.validate();
  Snapshot s;
  s.twist.alpha = get<double>(is);
  s.twist.beta = get<double>(is);
  s.h.resize(g.slice());
  for (double& x : s.h) x = get<double>(is);
  s.field = SpinorGrid::zeros(g);
  for (auto* f : {&s.field.u, &s.field.v})
    for (cplx& z : *f) {
      const double re = get<double>(is);
      z = cplx(re, get<double>(is));
    }
  return s;
}

}  // namespace g2lab
