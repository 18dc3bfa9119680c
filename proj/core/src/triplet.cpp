#include "peeropt/triplet.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

#include "peeropt/polykit.hpp"
#include "peeropt/verify.hpp"

namespace peeropt {

namespace {

Mat4 to_mat(const RatMat4& m) {
  Mat4 out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out(i, j) = m[i][j].value();
  return out;
}

Vec4 to_vec(const RatVec4& v) {
  Vec4 out;
  for (int i = 0; i < 4; ++i) out(i) = v[i].value();
  return out;
}

// Strict lower triangle of src plus the given diagonal.
Mat4 lower_with_diag(const Mat4& src, const Vec4& diag) {
  Mat4 out = Mat4::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < i; ++j) out(i, j) = src(i, j);
    out(i, i) = diag(i);
  }
  return out;
}

void finalize(PeerTriplet& t) {
  t.V = vandermonde<4>(t.c);
  t.Vinv = t.V.inverse();
  t.errc = error_constants(t);
}

PeerTriplet make_vgi() {
  PeerTriplet t;
  t.name = "AP4o33vgi";
  t.grid_class = GridClass::general;

  ExactTables ex;
  ex.c = {Rat{0}, Rat{1, 3}, Rat{2, 3}, Rat{1}};
  ex.kdiag = {Rat{1, 8}, Rat{3, 8}, Rat{3, 8}, Rat{1, 8}};
  ex.A = {{{Rat{1}, Rat{0}, Rat{0}, Rat{0}},
           {Rat{-9, 4}, Rat{9, 4}, Rat{0}, Rat{0}},
           {Rat{9, 4}, Rat{-9, 2}, Rat{9, 4}, Rat{0}},
           {Rat{-1}, Rat{9, 4}, Rat{-9, 4}, Rat{1}}}};
  ex.A0 = {{{Rat{47161, 23112}, Rat{945, 1712}, Rat{9, 856}, Rat{-113, 1712}},
            {Rat{-41383, 7704}, Rat{1017, 1712}, Rat{-27, 856}, Rat{339, 1712}},
            {Rat{41383, 7704}, Rat{-4869, 1712}, Rat{1953, 856}, Rat{-339, 1712}},
            {Rat{-47161, 23112}, Rat{2907, 1712}, Rat{-1935, 856}, Rat{1825, 1712}}}};
  ex.AN = {{{Rat{1825, 1712}, Rat{-339, 1712}, Rat{339, 1712}, Rat{-113, 1712}},
            {Rat{-1935, 856}, Rat{1953, 856}, Rat{-27, 856}, Rat{9, 856}},
            {Rat{2907, 1712}, Rat{-4869, 1712}, Rat{1017, 1712}, Rat{945, 1712}},
            {Rat{-47161, 23112}, Rat{41383, 7704}, Rat{-41383, 7704}, Rat{47161, 23112}}}};
  ex.at0_diag = {Rat{154, 75}, Rat{69, 40}, Rat{219, 94}, Rat{67, 63}};
  ex.atN_diag = {Rat{67, 63}, Rat{219, 94}, Rat{69, 40}, Rat{154, 75}};
  ex.a = row_sums(ex.A0);
  ex.w = column_sums(ex.AN);
  ex.W = {{{Rat{1}, Rat{-2}, Rat{24, 5}, Rat{-9, 2}},
           {Rat{1}, Rat{-4, 3}, Rat{0}, Rat{3, 2}},
           {Rat{1}, Rat{-2, 3}, Rat{-8, 5}, Rat{3, 2}},
           {Rat{1}, Rat{0}, Rat{0}, Rat{0}}}};

  t.c = to_vec(ex.c);
  t.kdiag = to_vec(ex.kdiag);
  t.A = to_mat(ex.A);
  t.A0 = to_mat(ex.A0);
  t.AN = to_mat(ex.AN);
  t.At0 = lower_with_diag(t.A0, to_vec(ex.at0_diag));
  t.AtN = lower_with_diag(t.AN, to_vec(ex.atN_diag));
  t.a = to_vec(ex.a);
  t.w = to_vec(ex.w);
  t.W = to_mat(*ex.W);
  t.exact = std::move(ex);

  t.a41_hat = 0.0;
  t.b24.coef = {1.0 / 36, 0, 0, 0, 0};
  t.b34.coef = {0, 0, 0, 0, 0};
  t.b42.coef = {0, 0, 1.0 / 36, 0, 0};
  t.b43.coef = {0, 0, 1.0 / 18, 0, 0};
  t.b44.coef = {65.0 / 804, -149.0 / 804, 132.0 / 804, 0, 0};

  t.alpha_deg = 61.59;
  t.sigma_min = 0.57;
  t.sigma_max = 2.10;

  finalize(t);
  return t;
}

PeerTriplet make_vsi() {
  PeerTriplet t;
  t.name = "AP4o33vsi";
  t.grid_class = GridClass::smooth;

  t.c << 144997.0 / 389708, 73.0 / 748, 77297572.0 / 117896267, 1.0;
  t.kdiag << 0.2089552772313791, 0.2461266069992848, 0.4259606950456414,
      0.1189574207236947;
  t.A << 0.7588470158140062, 0, 0, 0,
      0.4346633458753195, 0.5989561692950702, 0, 0,
      -3.295204661275873, -0.3671669165116753, 2.473930545531403, 0,
      2.101694299586548, -0.2317892527833949, -2.473930545531403, 1;
  t.A0 << 1.26852968140859992, -2.79702966259295784, 0.0151774841161155076, 0,
      0.254440961986028910, 1.58797813851094452, -0.00536671649536513773, 0,
      -3.75232398970999177, 2.14140637287657549, 2.46031830832026582, 0,
      2.22935334631536294, -0.932354848794562167, -2.47012907594101619, 1;
  t.AN << 0.721680741868241430, 0.0131418918926231641, 0.0333333333333333333,
      -0.00930895128019174555,
      0.123032993110224916, 0.709147801969229717, 0.279492058866634697,
      -0.078053338775699573,
      -1.03159221459763137, -1.16757403034966595, 0.443763401719389714,
      0.566961810971761768,
      5.56340552222272135, -1.45584078718664692, -5.57863709363081650,
      1.86704685986649197;

  Vec4 at0, atN;
  at0 << 1.58950617283950617, 1.66216216216216216, 2.47, 1.0;
  atN << 0.725, 0.681818181818181818, 2.0, 1.91525423728813559;
  t.At0 = lower_with_diag(t.A0, at0);
  t.AtN = lower_with_diag(t.AN, atN);

  t.a = t.A0 * Vec4::Ones();
  t.w = t.AN.transpose() * Vec4::Ones();

  t.a41_hat = 0.1010743874247749;
  t.b24.coef = {0.02321239244678227, 0, 0, 0, 0};
  t.b34.coef = {0, 0, 0, 0, 0};
  t.b42.coef = {0, t.a41_hat, 0.003586671392069201, 0, 0};
  t.b43.coef = {0, t.a41_hat, 0.007173342784138403, -0.002465255918355442, 0};
  t.b44.coef = {0, 0.0078782707622298066, 0.1683589306029579, -0.1125, 0.025};

  t.alpha_deg = 83.74;
  t.sigma_min = 0.65;
  t.sigma_max = 1.80;

  finalize(t);
  return t;
}

}  // namespace

Mat4 PeerTriplet::bhat(double sigma) const {
  Mat4 bh = Mat4::Zero();
  bh.row(0).setOnes();
  bh(1, 3) = b24(sigma);
  bh(2, 3) = b34(sigma);
  bh(3, 0) = a41_hat;
  bh(3, 1) = b42(sigma);
  bh(3, 2) = b43(sigma);
  bh(3, 3) = b44(sigma);
  return bh;
}

std::vector<std::string> builtin_triplet_names() {
  return {"AP4o33vgi", "AP4o33vsi"};
}

PeerTriplet build_triplet(const std::string& name) {
  if (name == "AP4o33vgi") return make_vgi();
  if (name == "AP4o33vsi") return make_vsi();
  std::ostringstream os;
  os << "unknown triplet '" << name << "', available:";
  for (const auto& n : builtin_triplet_names()) os << ' ' << n;
  throw std::invalid_argument(os.str());
}

const PeerTriplet& builtin_triplet(const std::string& name) {
  static std::map<std::string, PeerTriplet> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, build_triplet(name)).first;
  return it->second;
}

Mat4 assemble_B(const PeerTriplet& t, double sigma) {
  if (!(sigma > 0))
    throw std::invalid_argument("assemble_B requires sigma > 0");
  return t.Vinv.transpose() * t.bhat(sigma) * t.Vinv;
}

}  // namespace peeropt
