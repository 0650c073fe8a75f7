#include "helmstab/fieldio.hpp"

#include <fstream>

#include "json.hpp"

namespace helmstab {

using nlohmann::json;

namespace {

json field_header(const Geometry& g, Support s, const std::optional<TorusGrid>& t, std::size_t count,
                  bool is_complex, const std::string& name) {
  json j;
  j["name"] = name;
  j["support"] = support_name(s);
  j["dtype"] = is_complex ? "complex128" : "float64";
  j["count"] = count;
  j["spacing"] = g.h();
  j["subdivisions"] = g.N();
  j["byte_order"] = "little";
  if (s == Support::interior) {
    j["shape"] = {g.N() - 1, g.N() - 1, g.N() - 1};
    j["node_order"] = "lexicographic (i,j,k), k fastest, indices 1..N-1";
  } else if (s == Support::boundary) {
    j["shape"] = {6, g.N() - 1, g.N() - 1};
    j["node_order"] = "face-major x0,x1,y0,y1,z0,z1; tangential (a,b) with b fastest";
  } else {
    j["shape"] = {t->M[0], t->M[1], t->M[2]};
    j["offset"] = {t->offset[0], t->offset[1], t->offset[2]};
    j["node_order"] = "torus (a,b,c), c fastest; global index = offset + a";
  }
  return j;
}

void write_bytes(const std::string& path, const void* data, std::size_t bytes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << text << "\n";
}

}  // namespace

void write_field(const std::string& stem, const RealField& f, const std::string& name) {
  f.check();
  write_bytes(stem + ".bin", f.values.data(), f.size() * sizeof(double));
  write_text(stem + ".json", field_header(*f.geometry, f.support, f.torus, f.size(), false, name).dump(2));
}

void write_field(const std::string& stem, const ComplexField& f, const std::string& name) {
  f.check();
  write_bytes(stem + ".bin", f.values.data(), f.size() * sizeof(Complex));
  write_text(stem + ".json", field_header(*f.geometry, f.support, f.torus, f.size(), true, name).dump(2));
}

ComplexField read_field(const std::string& stem, GeometryPtr g) {
  std::ifstream hs(stem + ".json");
  if (!hs) throw Error("cannot open " + stem + ".json");
  json j = json::parse(hs);
  const std::string sup = j.at("support");
  const std::size_t count = j.at("count");
  const bool cplx = j.at("dtype") == "complex128";
  ComplexField f;
  f.geometry = g;
  if (sup == "interior") {
    f.support = Support::interior;
  } else if (sup == "boundary") {
    f.support = Support::boundary;
  } else {
    f.support = Support::torus;
    TorusGrid t;
    t.h = j.at("spacing");
    for (int d = 0; d < 3; ++d) {
      t.M[d] = j.at("shape")[d];
      t.offset[d] = j.at("offset")[d];
    }
    f.torus = t;
  }
  std::ifstream bs(stem + ".bin", std::ios::binary);
  if (!bs) throw Error("cannot open " + stem + ".bin");
  f.values.resize(static_cast<Eigen::Index>(count));
  if (cplx) {
    bs.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(count * sizeof(Complex)));
  } else {
    std::vector<double> tmp(count);
    bs.read(reinterpret_cast<char*>(tmp.data()), static_cast<std::streamsize>(count * sizeof(double)));
    for (std::size_t i = 0; i < count; ++i) f.values[static_cast<Eigen::Index>(i)] = tmp[i];
  }
  if (!bs) throw Error("short read on " + stem + ".bin");
  f.check();
  return f;
}

void write_matrix(const std::string& stem, const CMat& m, const std::string& header_json) {
  write_bytes(stem + ".bin", m.data(), static_cast<std::size_t>(m.size()) * sizeof(Complex));
  json j = json::parse(header_json);
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["dtype"] = "complex128";
  j["layout"] = "column-major";
  write_text(stem + ".json", j.dump(2));
}

CMat read_matrix(const std::string& stem) {
  std::ifstream hs(stem + ".json");
  if (!hs) throw Error("cannot open " + stem + ".json");
  json j = json::parse(hs);
  CMat m(static_cast<Eigen::Index>(j.at("rows")), static_cast<Eigen::Index>(j.at("cols")));
  std::ifstream bs(stem + ".bin", std::ios::binary);
  bs.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(Complex)));
  if (!bs) throw Error("short read on " + stem + ".bin");
  return m;
}

}  // namespace helmstab
