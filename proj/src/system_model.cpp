#include "irsbf/system_model.hpp"

#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

namespace irsbf {

ScenarioGeometry ScenarioGeometry::with_sizes(int N, int M, int K) {
  ScenarioGeometry g;
  g.N = N;
  g.M = M;
  g.K = K;
  g.Ny = 1;
  for (int d = 4; d >= 1; --d) {
    if (N % d == 0) {
      g.Ny = d;
      break;
    }
  }
  g.Nz = N / g.Ny;
  return g;
}

void ScenarioGeometry::validate() const {
  if (M < 1 || N < 1 || K < 1) throw std::invalid_argument("geometry: M, N, K must be >= 1");
  if (Ny < 1 || Nz < 1 || Ny * Nz != N) throw std::invalid_argument("geometry: Ny * Nz must equal N");
  if (!(user_cluster_radius >= 0.0)) throw std::invalid_argument("geometry: negative cluster radius");
}

void PropagationParams::validate() const {
  if (!(C0 > 0.0) || !(D0 > 0.0)) throw std::invalid_argument("propagation: C0 and D0 must be positive");
  if (!(alpha_au > 0.0 && alpha_ai > 0.0 && alpha_iu > 0.0))
    throw std::invalid_argument("propagation: path-loss exponents must be positive");
  if (!(beta_au >= 0.0 && beta_ai >= 0.0 && beta_iu >= 0.0))
    throw std::invalid_argument("propagation: Rician factors must be nonnegative");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("propagation: sigma2 must be positive");
}

double path_loss(double d, double alpha, const PropagationParams& params) {
  if (!(d > 0.0)) throw std::domain_error("path_loss: distance must be positive");
  return params.C0 * std::pow(d / params.D0, -alpha);
}

CVector ula_response(int M, const Point3& direction) {
  const Point3 u = direction.normalized();
  CVector a(M);
  for (int m = 0; m < M; ++m) a(m) = std::polar(1.0, kPi * m * u.y());
  return a;
}

CVector upa_response(int Ny, int Nz, const Point3& direction) {
  const Point3 u = direction.normalized();
  CVector a(Ny * Nz);
  for (int iz = 0; iz < Nz; ++iz)
    for (int iy = 0; iy < Ny; ++iy) a(iz * Ny + iy) = std::polar(1.0, kPi * (iy * u.y() + iz * u.z()));
  return a;
}

CMatrix sample_rician_channel(const CMatrix& los, double beta, double gain, Rng& rng) {
  if (!(beta >= 0.0)) throw std::domain_error("sample_rician_channel: negative Rician factor");
  if (!(gain >= 0.0)) throw std::domain_error("sample_rician_channel: negative link gain");
  const CMatrix nlos = rng.cscg_matrix(los.rows(), los.cols());
  const double w_los = std::sqrt(beta / (1.0 + beta));
  const double w_nlos = std::sqrt(1.0 / (1.0 + beta));
  return std::sqrt(gain) * (w_los * los + w_nlos * nlos);
}

CMatrix sample_rician_channel(const CMatrix& los, double beta, double gain, std::uint64_t seed) {
  Rng rng(seed);
  return sample_rician_channel(los, beta, gain, rng);
}

std::vector<Point3> draw_user_positions(const ScenarioGeometry& geometry, Rng& rng) {
  std::vector<Point3> users;
  users.reserve(geometry.K);
  for (int k = 0; k < geometry.K; ++k) {
    const double r = geometry.user_cluster_radius * std::sqrt(rng.uniform());
    const double phi = 2.0 * kPi * rng.uniform();
    users.push_back(geometry.user_cluster_center + Point3(r * std::cos(phi), r * std::sin(phi), 0.0));
  }
  return users;
}

ChannelSet assemble_channels(CMatrix G, std::vector<CVector> h_r, std::vector<CVector> h_d) {
  if (h_r.size() != h_d.size()) throw std::invalid_argument("assemble_channels: user count mismatch");
  ChannelSet cs;
  cs.G = std::move(G);
  cs.h_r = std::move(h_r);
  cs.h_d = std::move(h_d);
  const Eigen::Index N = cs.G.rows();
  const Eigen::Index M = cs.G.cols();
  for (std::size_t k = 0; k < cs.h_r.size(); ++k) {
    if (cs.h_r[k].size() != N || cs.h_d[k].size() != M)
      throw std::invalid_argument("assemble_channels: link dimension mismatch");
    CMatrix Hk = cs.h_r[k].conjugate().asDiagonal() * cs.G;
    CMatrix Ht(N + 1, M);
    Ht.row(0) = cs.h_d[k].adjoint();
    Ht.bottomRows(N) = Hk;
    cs.H.push_back(std::move(Hk));
    cs.H_tilde.push_back(std::move(Ht));
  }
  return cs;
}

ChannelSet synthesize_channels(const ScenarioGeometry& geometry, const PropagationParams& params,
                               const std::vector<Point3>& users, Rng& rng) {
  geometry.validate();
  params.validate();
  const Point3 ap_to_irs = geometry.irs_position - geometry.ap_position;
  const CMatrix G_los = upa_response(geometry.Ny, geometry.Nz, -ap_to_irs) *
                        ula_response(geometry.M, ap_to_irs).transpose();
  CMatrix G = sample_rician_channel(G_los, params.beta_ai,
                                    path_loss(ap_to_irs.norm(), params.alpha_ai, params), rng);

  std::vector<CVector> h_r, h_d;
  for (const Point3& user : users) {
    const Point3 irs_to_user = user - geometry.irs_position;
    const Point3 ap_to_user = user - geometry.ap_position;
    const CMatrix r_los = upa_response(geometry.Ny, geometry.Nz, irs_to_user).conjugate();
    const CMatrix d_los = ula_response(geometry.M, ap_to_user).conjugate();
    h_r.push_back(sample_rician_channel(r_los, params.beta_iu,
                                       path_loss(irs_to_user.norm(), params.alpha_iu, params), rng));
    h_d.push_back(sample_rician_channel(d_los, params.beta_au,
                                       path_loss(ap_to_user.norm(), params.alpha_au, params), rng));
  }
  ChannelSet cs = assemble_channels(std::move(G), std::move(h_r), std::move(h_d));
  cs.user_positions = users;
  return cs;
}

ChannelSet synthesize_scenario(const ScenarioGeometry& geometry, const PropagationParams& params,
                               std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<Point3> users = draw_user_positions(geometry, rng);
  return synthesize_channels(geometry, params, users, rng);
}

namespace {

void dump_matrix(std::ostream& os, const std::string& name, int user, const CMatrix& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      os << name << ',' << user << ',' << i << ',' << j << ',' << A(i, j).real() << ',' << A(i, j).imag()
         << '\n';
}

}  // namespace

void write_channels_csv(std::ostream& os, const ChannelSet& channels) {
  const auto flags = os.flags();
  os << std::setprecision(17);
  os << "matrix,user,row,col,re,im\n";
  dump_matrix(os, "G", -1, channels.G);
  for (int k = 0; k < channels.K(); ++k) {
    dump_matrix(os, "h_r", k, channels.h_r[k]);
    dump_matrix(os, "h_d", k, channels.h_d[k]);
  }
  os.flags(flags);
}

}  // namespace irsbf
