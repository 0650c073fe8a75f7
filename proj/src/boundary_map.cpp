#include "helmstab/boundary_map.hpp"

#include <algorithm>
#include <random>
#include <thread>

#include "helmstab/fieldio.hpp"
#include "json.hpp"

namespace helmstab {

std::string map_kind_name(MapKind k) { return k == MapKind::dtn ? "dtn" : "rtd"; }

CVec BoundaryMap::embed(const CVec& out) const {
  if (!basis) throw ShapeError("bare map has no geometry to embed into");
  if (out.size() != static_cast<Eigen::Index>(output_nodes.size())) throw ShapeError("output length");
  CVec full = CVec::Zero(static_cast<Eigen::Index>(basis->geometry->boundary_count()));
  for (std::size_t i = 0; i < output_nodes.size(); ++i)
    full[static_cast<Eigen::Index>(output_nodes[i])] = out[static_cast<Eigen::Index>(i)];
  return full;
}

BoundaryMap bare_map(const CMat& m) {
  BoundaryMap b;
  b.matrix = m;
  b.input_gram = RMat::Identity(m.cols(), m.cols());
  b.output_weight = std::make_shared<IdentityWeight>(static_cast<std::size_t>(m.rows()));
  b.s_in = b.s_out = 0.0;
  return b;
}

namespace {

BoundaryMap empty_map(MapKind kind, double lambda, const Potential& q, TraceBasisPtr basis, double s_in,
                      double s_out) {
  const Geometry& g = *basis->geometry;
  BoundaryMap m;
  m.kind = kind;
  m.lambda = lambda;
  m.s_in = s_in;
  m.s_out = s_out;
  m.potential_id = q.id();
  m.input_gram = RMat::Identity(basis->size(), basis->size());
  m.output_nodes = g.sigma_nodes();
  BoundarySobolev bs(basis->geometry);
  m.output_weight = bs.patch_weight(s_out, g.sigma_mask());
  m.matrix.resize(static_cast<Eigen::Index>(m.output_nodes.size()), basis->size());
  m.basis = std::move(basis);
  return m;
}

void check_basis(const TraceBasisPtr& basis, const Potential& q, double s_in) {
  if (!basis) throw ShapeError("map assembly needs a trace basis");
  if (basis->geometry != q.geometry()) throw ShapeError("basis and potential live on different geometries");
  if (basis->s != s_in) throw ShapeError("trace basis is orthonormal for the wrong Sobolev exponent");
}

}  // namespace

BoundaryMap assemble_dtn(const DirichletSolver& solver, TraceBasisPtr basis, int threads) {
  check_basis(basis, solver.potential(), 1.5);
  BoundaryMap m = empty_map(MapKind::dtn, solver.lambda(), solver.potential(), basis, 1.5, 0.5);
  const int k = basis->size();
  auto column = [&](int j) {
    const CVec phi = basis->vectors.col(j).cast<Complex>();
    const CVec u = solver.solve(CVec(), phi);
    const CVec fl = solver.flux(u, phi);
    for (std::size_t i = 0; i < m.output_nodes.size(); ++i)
      m.matrix(static_cast<Eigen::Index>(i), j) = fl[static_cast<Eigen::Index>(m.output_nodes[i])];
  };
  const int nt = std::max(1, std::min(threads, k));
  if (nt == 1) {
    for (int j = 0; j < k; ++j) column(j);
  } else {
    // columns are independent and the factorisation is read-only
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t)
      pool.emplace_back([&, t] {
        for (int j = t; j < k; j += nt) column(j);
      });
    for (auto& th : pool) th.join();
  }
  return m;
}

BoundaryMap assemble_dtn(const Potential& q, double lambda, TraceBasisPtr basis, SolverOptions opt) {
  DirichletSolver s(q, lambda, opt);
  return assemble_dtn(s, std::move(basis));
}

BoundaryMap assemble_rtd(const RobinSolver& solver, TraceBasisPtr basis) {
  check_basis(basis, solver.potential(), 0.5);
  BoundaryMap m = empty_map(MapKind::rtd, solver.lambda(), solver.potential(), basis, 0.5, 1.5);
  for (int j = 0; j < basis->size(); ++j) {
    const CVec phi = basis->vectors.col(j).cast<Complex>();
    const RobinSolution s = solver.solve(CVec(), phi);
    for (std::size_t i = 0; i < m.output_nodes.size(); ++i)
      m.matrix(static_cast<Eigen::Index>(i), j) = s.trace[m.output_nodes[i]];
  }
  return m;
}

BoundaryMap assemble_rtd(const Potential& q, double lambda, const ImpedanceParams& params, TraceBasisPtr basis,
                         SolverOptions opt) {
  RobinSolver s(q, lambda, params, opt);
  return assemble_rtd(s, std::move(basis));
}

BoundaryMap map_difference(const BoundaryMap& a, const BoundaryMap& b) {
  if (a.kind != b.kind) throw ShapeError("cannot subtract maps of different kinds");
  if (a.lambda != b.lambda) throw ShapeError("cannot subtract maps at different lambda");
  if (a.matrix.rows() != b.matrix.rows() || a.matrix.cols() != b.matrix.cols())
    throw ShapeError("map shapes differ");
  if ((a.basis && b.basis) && a.basis->hash != b.basis->hash) throw ShapeError("maps use different trace bases");
  if (a.output_nodes != b.output_nodes) throw ShapeError("maps use different output nodes");
  BoundaryMap d = a;
  d.matrix = a.matrix - b.matrix;
  d.potential_id = a.potential_id + "-" + b.potential_id;
  return d;
}

double operator_norm(const BoundaryMap& m) {
  const Eigen::Index k = m.matrix.cols();
  if (k == 0 || m.matrix.rows() == 0) return 0.0;
  if (!m.output_weight || static_cast<Eigen::Index>(m.output_weight->size()) != m.matrix.rows())
    throw ShapeError("output weight does not match the map");
  CMat K = m.matrix.adjoint() * m.output_weight->apply(m.matrix);
  K = 0.5 * (K + K.adjoint()).eval();
  RMat G = m.input_gram.size() ? m.input_gram : RMat::Identity(k, k);
  Eigen::LLT<RMat> llt(G);
  if (llt.info() != Eigen::Success) throw Error("input Gram matrix is not positive definite");
  // L^{-1} K L^{-H}
  const CMat L = RMat(llt.matrixL()).cast<Complex>();
  CMat T = L.triangularView<Eigen::Lower>().solve(K);
  T = L.triangularView<Eigen::Lower>().solve(CMat(T.adjoint()));
  T = 0.5 * (T + T.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMat> es(T, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

void export_map(const std::string& stem, const BoundaryMap& m) {
  nlohmann::json j;
  j["kind"] = map_kind_name(m.kind);
  j["lambda"] = m.lambda;
  j["s_in"] = m.s_in;
  j["s_out"] = m.s_out;
  j["potential_id"] = m.potential_id;
  j["basis_hash"] = m.basis ? m.basis->hash : "";
  j["basis_size"] = m.matrix.cols();
  j["output_nodes"] = m.output_nodes.size();
  j["input_weight"] = "orthonormal basis, Gram " + std::to_string(m.input_gram.rows()) + "x" +
                      std::to_string(m.input_gram.cols());
  j["output_weight"] = m.output_weight ? m.output_weight->describe() : "none";
  j["operator_norm"] = operator_norm(m);
  write_matrix(stem, m.matrix, j.dump());
}

CVec DtnOperator::apply(const CVec& phi) const {
  const CVec u = s_->solve(CVec(), phi);
  return s_->flux(u, phi);
}

CVec RtdOperator::apply(const CVec& phi) const { return s_->solve(CVec(), phi).trace.values; }

DifferenceOperator::DifferenceOperator(std::shared_ptr<const BoundaryOperator> a,
                                       std::shared_ptr<const BoundaryOperator> b)
    : a_(std::move(a)), b_(std::move(b)) {
  if (a_->kind() != b_->kind()) throw ShapeError("cannot subtract operators of different kinds");
}

NoiseOperator::NoiseOperator(GeometryPtr g, MapKind kind) : g_(g), kind_(kind), bs_(g) {
  s_in_ = kind == MapKind::dtn ? 1.5 : 0.5;
  s_out_ = kind == MapKind::dtn ? 0.5 : 1.5;
}

CVec NoiseOperator::apply(const CVec& phi) const {
  const double h = g_->h();
  if (phi.size() != static_cast<Eigen::Index>(g_->boundary_count())) throw ShapeError("noise acts on whole-boundary data");
  const CVec y = apply_core(bs_.apply(phi, 0.5 * s_in_) / h);
  return bs_.apply(y, -0.5 * s_out_) / (h * h * h);
}

BoundaryMap NoiseOperator::as_map(const BoundaryMap& like) const {
  if (!like.basis) throw ShapeError("noise needs a basis to act through");
  if (like.kind != kind_) throw ShapeError("noise and map kinds differ");
  BoundaryMap m = like;
  m.potential_id = "noise";
  m.matrix.resize(static_cast<Eigen::Index>(like.output_nodes.size()), like.basis->size());
  for (int j = 0; j < like.basis->size(); ++j) {
    const CVec out = apply(like.basis->vectors.col(j).cast<Complex>());
    for (std::size_t i = 0; i < like.output_nodes.size(); ++i)
      m.matrix(static_cast<Eigen::Index>(i), j) = out[static_cast<Eigen::Index>(like.output_nodes[i])];
  }
  return m;
}

UnitNoiseOperator::UnitNoiseOperator(GeometryPtr g, MapKind kind, std::uint64_t seed, int rank)
    : NoiseOperator(g, kind) {
  const auto nb = static_cast<Eigen::Index>(g_->boundary_count());
  const Eigen::Index r = std::min<Eigen::Index>(std::max(rank, 1), nb);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  auto orth = [&]() {
    RMat X(nb, r);
    for (Eigen::Index j = 0; j < r; ++j)
      for (Eigen::Index i = 0; i < nb; ++i) X(i, j) = nd(rng);
    Eigen::HouseholderQR<RMat> qr(X);
    return RMat(qr.householderQ() * RMat::Identity(nb, r));
  };
  A_ = orth();
  B_ = orth();
  std::uniform_real_distribution<double> ud(0.1, 1.0);
  sigma_.resize(r);
  for (Eigen::Index j = 0; j < r; ++j) sigma_[j] = ud(rng);
  std::sort(sigma_.data(), sigma_.data() + r, std::greater<double>());
  sigma_[0] = 1.0;
}

CVec UnitNoiseOperator::apply_core(const CVec& x) const {
  return A_.cast<Complex>() * (sigma_.cast<Complex>().asDiagonal() * (B_.transpose().cast<Complex>() * x));
}

AlignedNoiseOperator::AlignedNoiseOperator(GeometryPtr g, MapKind kind, const CVec& x, const CVec& y)
    : NoiseOperator(g, kind) {
  const double h = g_->h();
  const auto nb = static_cast<Eigen::Index>(g_->boundary_count());
  if (x.size() != nb || y.size() != nb) throw ShapeError("aligned noise needs whole-boundary data");
  v_ = bs_.apply(x, 0.5 * s_in_) / h;
  u_ = (bs_.apply(y, -0.5 * s_out_) / (h * h * h)).conjugate();
  if (!(v_.norm() > 0.0) || !(u_.norm() > 0.0)) throw DomainError("aligned noise needs nonzero data");
  v_.normalize();
  u_.normalize();
}

CVec AlignedNoiseOperator::apply_core(const CVec& x) const { return u_ * v_.dot(x); }

BoundaryMap perturbed_map(const BoundaryMap& m, const NoiseOperator& E, double level) {
  BoundaryMap out = m;
  if (level != 0.0) out.matrix += level * E.as_map(m).matrix;
  return out;
}

}  // namespace helmstab
