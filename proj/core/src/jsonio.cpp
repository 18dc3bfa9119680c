#include "peeropt/jsonio.hpp"

#include <set>
#include <stdexcept>

#include "json.hpp"

namespace peeropt {

namespace {

using nlohmann::json;

json to_json(const Vec4& v) { return json::array({v(0), v(1), v(2), v(3)}); }

json to_json(const Mat4& m) {
  json rows = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int j = 0; j < 4; ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const SigmaPoly& p) {
  json arr = json::array();
  for (double x : p.coef) arr.push_back(x);
  return arr;
}

Vec4 vec_from(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 4)
    throw std::runtime_error("field '" + key + "' must be an array of 4 numbers");
  Vec4 v;
  for (int i = 0; i < 4; ++i) v(i) = j.at(static_cast<size_t>(i)).get<double>();
  return v;
}

Mat4 mat_from(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 4)
    throw std::runtime_error("field '" + key + "' must be a 4x4 array");
  Mat4 m;
  for (int i = 0; i < 4; ++i) {
    const json& row = j.at(static_cast<size_t>(i));
    if (!row.is_array() || row.size() != 4)
      throw std::runtime_error("field '" + key + "' must be a 4x4 array");
    for (int k = 0; k < 4; ++k)
      m(i, k) = row.at(static_cast<size_t>(k)).get<double>();
  }
  return m;
}

SigmaPoly poly_from(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 5)
    throw std::runtime_error("field '" + key + "' must be an array of 5 numbers");
  SigmaPoly p;
  for (int i = 0; i < 5; ++i)
    p.coef[static_cast<size_t>(i)] = j.at(static_cast<size_t>(i)).get<double>();
  return p;
}

}  // namespace

std::string triplet_to_json(const PeerTriplet& t) {
  json j;
  j["name"] = t.name;
  j["grid_class"] = t.grid_class == GridClass::general ? "general" : "smooth";
  j["alpha_deg"] = t.alpha_deg;
  j["sigma_range"] = json::array({t.sigma_min, t.sigma_max});
  j["c"] = to_json(t.c);
  j["kdiag"] = to_json(t.kdiag);
  j["a"] = to_json(t.a);
  j["w"] = to_json(t.w);
  j["A"] = to_json(t.A);
  j["A0"] = to_json(t.A0);
  j["AN"] = to_json(t.AN);
  j["At0"] = to_json(t.At0);
  j["AtN"] = to_json(t.AtN);
  if (t.W) j["W"] = to_json(*t.W);
  j["a41_hat"] = t.a41_hat;
  j["b24"] = to_json(t.b24);
  j["b34"] = to_json(t.b34);
  j["b42"] = to_json(t.b42);
  j["b43"] = to_json(t.b43);
  j["b44"] = to_json(t.b44);
  j["error_constants"] = {{"interior_fwd", t.errc.interior_fwd},
                          {"interior_adj", t.errc.interior_adj},
                          {"start_fwd", t.errc.start_fwd},
                          {"start_adj", t.errc.start_adj},
                          {"end_fwd", t.errc.end_fwd},
                          {"end_adj", t.errc.end_adj}};
  return j.dump(2) + "\n";
}

PeerTriplet triplet_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("coefficient file is not valid JSON: ") +
                             e.what());
  }
  if (!j.is_object())
    throw std::runtime_error("coefficient file must hold a JSON object");

  static const std::set<std::string> known = {
      "name", "grid_class", "alpha_deg", "sigma_range", "c", "kdiag", "a", "w",
      "A",    "A0",         "AN",        "At0",         "AtN", "W",   "a41_hat",
      "b24",  "b34",        "b42",       "b43",         "b44",
      "error_constants"};
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw std::runtime_error("unknown key '" + item.key() +
                               "' in coefficient file");
  static const char* required[] = {
      "name", "grid_class", "alpha_deg", "sigma_range", "c", "kdiag", "a", "w",
      "A",    "A0",         "AN",        "At0",         "AtN", "a41_hat",
      "b24",  "b34",        "b42",       "b43",         "b44",
      "error_constants"};
  for (const char* key : required)
    if (!j.contains(key))
      throw std::runtime_error(std::string("missing key '") + key +
                               "' in coefficient file");

  PeerTriplet t;
  t.name = j["name"].get<std::string>();
  const std::string gc = j["grid_class"].get<std::string>();
  if (gc == "general")
    t.grid_class = GridClass::general;
  else if (gc == "smooth")
    t.grid_class = GridClass::smooth;
  else
    throw std::runtime_error("grid_class must be 'general' or 'smooth'");
  t.alpha_deg = j["alpha_deg"].get<double>();
  const json& sr = j["sigma_range"];
  if (!sr.is_array() || sr.size() != 2)
    throw std::runtime_error("sigma_range must be an array of 2 numbers");
  t.sigma_min = sr.at(0).get<double>();
  t.sigma_max = sr.at(1).get<double>();
  t.c = vec_from(j["c"], "c");
  t.kdiag = vec_from(j["kdiag"], "kdiag");
  t.a = vec_from(j["a"], "a");
  t.w = vec_from(j["w"], "w");
  t.A = mat_from(j["A"], "A");
  t.A0 = mat_from(j["A0"], "A0");
  t.AN = mat_from(j["AN"], "AN");
  t.At0 = mat_from(j["At0"], "At0");
  t.AtN = mat_from(j["AtN"], "AtN");
  if (j.contains("W")) t.W = mat_from(j["W"], "W");
  t.a41_hat = j["a41_hat"].get<double>();
  t.b24 = poly_from(j["b24"], "b24");
  t.b34 = poly_from(j["b34"], "b34");
  t.b42 = poly_from(j["b42"], "b42");
  t.b43 = poly_from(j["b43"], "b43");
  t.b44 = poly_from(j["b44"], "b44");
  const json& ec = j["error_constants"];
  for (const char* key : {"interior_fwd", "interior_adj", "start_fwd",
                          "start_adj", "end_fwd", "end_adj"})
    if (!ec.contains(key))
      throw std::runtime_error(std::string("error_constants missing '") + key +
                               "'");
  t.errc.interior_fwd = ec["interior_fwd"].get<double>();
  t.errc.interior_adj = ec["interior_adj"].get<double>();
  t.errc.start_fwd = ec["start_fwd"].get<double>();
  t.errc.start_adj = ec["start_adj"].get<double>();
  t.errc.end_fwd = ec["end_fwd"].get<double>();
  t.errc.end_adj = ec["end_adj"].get<double>();

  t.V = Mat4::Zero();
  for (int i = 0; i < 4; ++i)
    for (int q = 0; q < 4; ++q) t.V(i, q) = std::pow(t.c(i), q);
  t.Vinv = t.V.inverse();
  return t;
}

std::string report_to_json(const TripletReport& rep) {
  json j;
  j["name"] = rep.name;
  j["grid_class"] = rep.grid_class;
  j["alpha_deg"] = rep.alpha_deg;
  j["sigma_range"] = json::array({rep.sigma_min, rep.sigma_max});
  j["order_residual_max"] = rep.order_residual_max;
  j["structure"] = {
      {"q33_residual", rep.structure.q33_residual},
      {"lsrk_residual", rep.structure.lsrk_residual},
      {"adjoint_lsrk", rep.structure.adjoint_lsrk},
      {"adjoint_lsrk_residual", rep.structure.adjoint_lsrk_residual},
      {"rank1_ratio_start", rep.structure.rank1_ratio_start},
      {"rank1_ratio_end", rep.structure.rank1_ratio_end},
      {"phi_start_residual", rep.structure.phi_start_residual},
      {"phi_end_residual", rep.structure.phi_end_residual},
      {"triangular_residual", rep.structure.triangular_residual},
      {"has_flip", rep.structure.has_flip},
      {"flip_exact", rep.structure.flip_exact},
      {"flip_residual", rep.structure.flip_residual},
      {"bflip_residual", rep.structure.bflip_residual}};
  j["error_constants"] = {{"interior_fwd", rep.errc.interior_fwd},
                          {"interior_adj", rep.errc.interior_adj},
                          {"start_fwd", rep.errc.start_fwd},
                          {"start_adj", rep.errc.start_adj},
                          {"end_fwd", rep.errc.end_fwd},
                          {"end_adj", rep.errc.end_adj}};
  j["superconvergence_max"] = json::array({rep.superconv[0], rep.superconv[1]});
  j["zero_stability_worst"] = rep.zero_stability_worst;
  j["zero_stability_weighted"] = rep.zero_stability_weighted;
  if (!rep.zero_stability_weighted)
    j["product_bound"] = rep.product_bound_value;
  j["stability_scan_worst"] = rep.stability_worst;
  j["contraction"] = {{"start_rho_real", rep.contraction_start.rho_real},
                      {"start_rho_sector", rep.contraction_start.rho_sector},
                      {"end_rho_real", rep.contraction_end.rho_real},
                      {"end_rho_sector", rep.contraction_end.rho_sector}};
  j["eigenvalue_margin"] = {{"start", rep.mu_start}, {"end", rep.mu_end}};
  j["failures"] = rep.failures;
  j["pass"] = rep.pass();
  return j.dump(2) + "\n";
}

}  // namespace peeropt
