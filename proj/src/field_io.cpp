#include "magplate/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace magplate {

using nlohmann::json;

namespace {

template <class V>
constexpr int arity() {
  if constexpr (std::is_arithmetic_v<V>) {
    return 1;
  } else {
    return int(V::RowsAtCompileTime * V::ColsAtCompileTime);
  }
}

template <class V>
void pack(const V& v, double* out) {
  if constexpr (std::is_arithmetic_v<V>) {
    out[0] = v;
  } else {
    for (int r = 0; r < V::RowsAtCompileTime; ++r)
      for (int c = 0; c < V::ColsAtCompileTime; ++c) out[r * V::ColsAtCompileTime + c] = v(r, c);
  }
}

template <class V>
V unpack(const double* in) {
  if constexpr (std::is_arithmetic_v<V>) {
    return in[0];
  } else {
    V v;
    for (int r = 0; r < V::RowsAtCompileTime; ++r)
      for (int c = 0; c < V::ColsAtCompileTime; ++c) v(r, c) = in[r * V::ColsAtCompileTime + c];
    return v;
  }
}

static_assert(std::endian::native == std::endian::little, "dump format assumes a little-endian host");

}  // namespace

json grid_json(const Grid2& g) {
  return {{"dim", 2}, {"nx", g.nx}, {"ny", g.ny}, {"origin", {g.origin.x(), g.origin.y()}},
          {"extent", {g.extent.x(), g.extent.y()}}};
}

json grid_json(const Grid3& g) {
  json j = grid_json(g.base);
  j["dim"] = 3;
  j["nz"] = g.nz;
  j["half"] = g.half;
  return j;
}

Grid2 grid2_from_json(const json& j) {
  return Grid2(j.at("nx").get<int>(), j.at("ny").get<int>(), Vec2(j.at("origin")[0], j.at("origin")[1]),
               Vec2(j.at("extent")[0], j.at("extent")[1]));
}

Grid3 grid3_from_json(const json& j) {
  return Grid3(grid2_from_json(j), j.at("nz").get<int>(), j.value("half", 0.5));
}

void write_dump(const std::string& path, const FieldDump& d) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << d.header.dump() << '\n';
  os.write(reinterpret_cast<const char*>(d.data.data()), std::streamsize(d.data.size() * sizeof(double)));
  if (!os) throw std::runtime_error("write failed: " + path);
}

FieldDump read_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open field dump " + path);
  std::string line;
  std::getline(is, line);
  FieldDump d;
  try {
    d.header = json::parse(line);
  } catch (const json::exception& e) {
    throw ConfigError("bad field dump header in " + path + ": " + e.what());
  }
  std::size_t n = d.header.at("count").get<std::size_t>();
  d.data.resize(n);
  is.read(reinterpret_cast<char*>(d.data.data()), std::streamsize(n * sizeof(double)));
  if (std::size_t(is.gcount()) != n * sizeof(double)) throw ConfigError("truncated field dump " + path);
  return d;
}

template <class G, class V>
void write_field(const std::string& path, const Field<G, V>& f, const json& meta) {
  FieldDump d;
  d.header = {{"grid", grid_json(f.grid())}, {"arity", arity<V>()}, {"layout", "x-fastest,component-fastest"},
              {"count", f.size() * arity<V>()}, {"meta", meta}};
  d.data.resize(f.size() * arity<V>());
  for (std::size_t p = 0; p < f.size(); ++p) pack(f[p], &d.data[p * arity<V>()]);
  write_dump(path, d);
}

template <class G, class V>
Field<G, V> field_from_dump(const FieldDump& d) {
  const json& gj = d.header.at("grid");
  G g;
  if constexpr (std::is_same_v<G, Grid3>) {
    if (gj.at("dim") != 3) throw ConfigError("expected a 3D field dump");
    g = grid3_from_json(gj);
  } else {
    if (gj.at("dim") != 2) throw ConfigError("expected a 2D field dump");
    g = grid2_from_json(gj);
  }
  if (d.header.at("arity").get<int>() != arity<V>()) throw ConfigError("field dump arity mismatch");
  if (d.data.size() != g.node_count() * arity<V>()) throw ConfigError("field dump size mismatch");
  Field<G, V> f(g);
  for (std::size_t p = 0; p < f.size(); ++p) {
    f[p] = unpack<V>(&d.data[p * arity<V>()]);
    if constexpr (std::is_arithmetic_v<V>) {
      if (!std::isfinite(f[p])) throw ConfigError("non-finite value in field dump");
    } else {
      if (!f[p].allFinite()) throw ConfigError("non-finite value in field dump");
    }
  }
  return f;
}

void write_csv(const std::string& path, const ScalarField2& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "x1,x2,value\n" << std::setprecision(17);
  for (std::size_t p = 0; p < f.size(); ++p) {
    Vec2 x = f.grid().node(p);
    os << x.x() << ',' << x.y() << ',' << f[p] << '\n';
  }
}

#define MAGPLATE_FIELD_IO(G, V)                                                   \
  template void write_field<G, V>(const std::string&, const Field<G, V>&, const json&); \
  template Field<G, V> field_from_dump<G, V>(const FieldDump&);

MAGPLATE_FIELD_IO(Grid2, double)
MAGPLATE_FIELD_IO(Grid2, Vec2)
MAGPLATE_FIELD_IO(Grid2, Vec3)
MAGPLATE_FIELD_IO(Grid3, double)
MAGPLATE_FIELD_IO(Grid3, Vec3)

}  // namespace magplate
