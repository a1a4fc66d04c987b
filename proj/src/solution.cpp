#include "stbem/solution.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace stbem {

namespace {
constexpr char kMagic[4] = {'S', 'T', 'B', 'S'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("solution container: truncated file");
  return v;
}

}  // namespace

void stochastic_solution::save(const std::string& path) const {
  for (double v : coeff.data)
    if (!std::isfinite(v)) throw std::runtime_error("solution container: non-finite entry");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("solution container: cannot write " + path);
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, static_cast<std::int32_t>(stochastic_dim));
  put(os, static_cast<std::int32_t>(max_degree));
  put(os, static_cast<std::uint64_t>(coeff.n_modes));
  put(os, static_cast<std::uint64_t>(coeff.n_steps));
  put(os, static_cast<std::uint64_t>(coeff.n_elems));
  put(os, dt);
  put(os, wave_speed);
  put(os, mesh_hash);
  os.write(reinterpret_cast<const char*>(coeff.data.data()),
           static_cast<std::streamsize>(coeff.data.size() * sizeof(double)));
  if (!os) throw std::runtime_error("solution container: write failed for " + path);
}

stochastic_solution stochastic_solution::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("solution container: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("solution container: bad magic in " + path);
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion)
    throw std::runtime_error("solution container: unsupported version in " + path);
  stochastic_solution s;
  s.stochastic_dim = get<std::int32_t>(is);
  s.max_degree = get<std::int32_t>(is);
  const auto nm = get<std::uint64_t>(is);
  const auto ns = get<std::uint64_t>(is);
  const auto ne = get<std::uint64_t>(is);
  s.dt = get<double>(is);
  s.wave_speed = get<double>(is);
  s.mesh_hash = get<std::uint64_t>(is);
  s.coeff = mode_tensor(nm, ns, ne);
  is.read(reinterpret_cast<char*>(s.coeff.data.data()),
          static_cast<std::streamsize>(s.coeff.data.size() * sizeof(double)));
  if (!is) throw std::runtime_error("solution container: truncated payload in " + path);
  return s;
}

void stochastic_solution::write_csv_slice(const std::string& path, std::size_t mode) const {
  if (mode >= coeff.n_modes) throw std::out_of_range("write_csv_slice: mode out of range");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_csv_slice: cannot write " + path);
  os << "step";
  for (std::size_t s = 0; s < coeff.n_elems; ++s) os << ",elem" << s;
  os << "\n";
  os.precision(17);
  for (std::size_t m = 0; m < coeff.n_steps; ++m) {
    os << m;
    for (std::size_t s = 0; s < coeff.n_elems; ++s) os << "," << coeff.at(mode, m, s);
    os << "\n";
  }
}

}  // namespace stbem
