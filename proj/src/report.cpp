#include "pnormal/report.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "pnormal/errors.hpp"

namespace pnormal {

ojson tau_to_json(const RiemannMatrix& tau) {
  const int g = tau.genus();
  ojson re = ojson::array(), im = ojson::array();
  for (int i = 0; i < g; ++i) {
    ojson rr = ojson::array(), ir = ojson::array();
    for (int j = 0; j < g; ++j) {
      rr.push_back(tau.real_part()(i, j));
      ir.push_back(tau.imag_part()(i, j));
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ir));
  }
  ojson out;
  out["g"] = g;
  out["re"] = std::move(re);
  out["im"] = std::move(im);
  return out;
}

namespace {

RMatrix read_square(const nlohmann::json& j, const char* key, int g) {
  if (!j.contains(key)) throw InvalidInput(std::string("tau: missing field \"") + key + "\"");
  const auto& rows = j.at(key);
  if (!rows.is_array() || static_cast<int>(rows.size()) != g)
    throw InvalidInput(std::string("tau: \"") + key + "\" must be an array of g rows");
  RMatrix m(g, g);
  for (int i = 0; i < g; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<int>(row.size()) != g)
      throw InvalidInput(std::string("tau: row ") + std::to_string(i) + " of \"" + key + "\" must have g entries");
    for (int k = 0; k < g; ++k) {
      const auto& v = row.at(static_cast<std::size_t>(k));
      if (!v.is_number())
        throw InvalidInput(std::string("tau: entry (") + std::to_string(i) + "," + std::to_string(k) + ") of \"" +
                           key + "\" is not a number");
      m(i, k) = v.get<double>();
    }
  }
  return m;
}

}  // namespace

RiemannMatrix tau_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidInput("tau: expected a JSON object");
  if (!j.contains("g") || !j.at("g").is_number_integer()) throw InvalidInput("tau: missing integer field \"g\"");
  const int g = j.at("g").get<int>();
  if (g < 1) throw InvalidInput("tau: g must be >= 1");
  CMatrix tau(g, g);
  tau.real() = read_square(j, "re", g);
  tau.imag() = read_square(j, "im", g);
  return RiemannMatrix(std::move(tau));
}

RiemannMatrix load_tau_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open tau file " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << "tau file " << path.string() << ": line " << line << ", column " << col << ": malformed JSON";
    const std::size_t bol = text.rfind('\n', stop == 0 ? 0 : stop - 1);
    const std::size_t from = (bol == std::string::npos || stop == 0) ? 0 : bol + 1;
    const std::size_t eol = text.find('\n', from);
    os << "\n  " << text.substr(from, eol == std::string::npos ? std::string::npos : eol - from);
    throw InvalidInput(os.str());
  }
  try {
    return tau_from_json(j);
  } catch (const InvalidInput& e) {
    throw InvalidInput("tau file " + path.string() + ": " + e.what());
  }
}

ojson margin_json(double margin) {
  if (std::isinf(margin)) return "inf";
  return margin;
}

ojson rank_report_json(const RankReport& r) {
  const auto& sv = r.singular_values;
  const auto n = static_cast<long>(sv.size());
  ojson head = ojson::array(), tail = ojson::array();
  for (long i = 0; i < std::min(3L, n); ++i) head.push_back(sv[static_cast<std::size_t>(i)]);
  for (long i = std::max(0L, r.rank - 2); i < std::min(n, r.rank + 2); ++i) tail.push_back(sv[static_cast<std::size_t>(i)]);
  ojson out;
  out["rank"] = r.rank;
  out["expected"] = r.expected;
  out["margin"] = margin_json(r.margin);
  out["stable"] = r.verdict_stable;
  out["sv_head"] = std::move(head);
  out["sv_tail"] = std::move(tail);
  return out;
}

ojson verdict_json(const NormalityVerdict& v, const Tolerances& tol, std::uint64_t seed) {
  ojson out;
  out["g"] = v.type.genus();
  out["type"] = v.type.divisors();
  out["h0"] = v.h0;
  out["bound"] = {{"lhs", v.h0}, {"rhs", v.bound_rhs}, {"holds", v.bound_holds}};
  out["two_normal"] = v.two_normal;
  ojson rn = ojson::object();
  for (const auto& [r, ok] : v.r_normal) rn[std::to_string(r)] = ok;
  out["r_normal"] = std::move(rn);
  out["dim_I2"] = v.dim_I2;
  out["rank"] = {{"value", v.rho2.rank},
                 {"expected", v.rho2.expected},
                 {"margin", margin_json(v.rho2.margin)},
                 {"stable", v.rho2.verdict_stable}};
  ojson ranks = ojson::object();
  for (const auto& [r, rep] : v.r_reports) ranks[std::to_string(r)] = rank_report_json(rep);
  out["rho"] = std::move(ranks);
  ojson blocks = ojson::array();
  for (std::size_t i = 0; i < v.block_ranks.size(); ++i)
    blocks.push_back({{"sigma_index", i},
                      {"rank", v.block_ranks[i].rank},
                      {"expected", v.block_ranks[i].expected},
                      {"margin", margin_json(v.block_ranks[i].margin)}});
  out["blocks"] = std::move(blocks);
  ojson kummer = ojson::array();
  for (const auto& k : v.kummer) kummer.push_back(k.spanning);
  out["kummer_span"] = std::move(kummer);
  out["tolerances"] = {{"theta_eps", tol.theta_epsilon}, {"rank_rel_tol", tol.rank_rel_tol}, {"zero_tol", tol.zero_tol}};
  out["seed"] = seed;
  out["genericity_assumed"] = v.genericity_assumed;
  out["model"] = "standard";
  return out;
}

}  // namespace pnormal
