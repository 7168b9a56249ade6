#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "mcl/harness.hpp"

namespace mcl {
namespace fs = std::filesystem;

namespace {

const char* kSlots[4] = {"bl", "br", "tl", "tr"};

std::string cell(double v) { return std::isnan(v) ? "nan" : format_double(v); }

double parse_cell(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw std::invalid_argument("bad CSV value '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("I/O error while writing '" + path + "'");
}

std::string eps_label(double eps) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "\xCE\xB5=%g", eps);
  return buf;
}

}  // namespace

std::vector<std::string> metadata_lines(const RunConfig& cfg) {
  std::vector<std::string> out{"mclsim v" MCL_VERSION};
  for (auto& [k, v] : flatten_pairs(cfg)) out.push_back(k + " = " + v);
  return out;
}

std::string format_csv(const CsvTable& t) {
  std::string out;
  for (const auto& c : t.comments) out += "# " + c + "\n";
  for (size_t j = 0; j < t.columns.size(); ++j) out += (j ? "," : "") + t.columns[j];
  out += "\n";
  for (const auto& r : t.rows) {
    for (size_t j = 0; j < r.size(); ++j) out += (j ? "," : "") + cell(r[j]);
    out += "\n";
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (!header && line.rfind("# ", 0) == 0) {
      t.comments.push_back(line.substr(2));
      continue;
    }
    if (!header) {
      t.columns = split(line, ',');
      header = true;
      continue;
    }
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& c : split(line, ',')) row.push_back(parse_cell(c));
    if (row.size() != t.columns.size())
      throw std::invalid_argument("CSV row has " + std::to_string(row.size()) + " values for " +
                                  std::to_string(t.columns.size()) + " columns");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  try {
    return parse_csv(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_csv(const std::string& path, const CsvTable& t) { write_text(path, format_csv(t)); }

CsvTable diagnostics_table(const RunConfig& cfg, const std::vector<DiagnosticsRecord>& recs) {
  CsvTable t;
  t.comments = metadata_lines(cfg);
  t.columns = {"t", "mass", "E_kin", "E_bulk", "E_wall", "divmax"};
  for (const char* s : kSlots) t.columns.push_back(std::string("x_cl_") + s);
  for (const char* s : kSlots) t.columns.push_back(std::string("theta_") + s);
  for (const auto& r : recs) {
    std::vector<double> row{r.t, r.mass, r.E_kin, r.E_bulk, r.E_wall, r.divmax};
    row.insert(row.end(), r.x_cl.begin(), r.x_cl.end());
    row.insert(row.end(), r.theta.begin(), r.theta.end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable contact_line_table(const RunConfig& cfg, const std::vector<DiagnosticsRecord>& recs) {
  CsvTable t;
  t.comments = metadata_lines(cfg);
  t.columns = {"t"};
  for (const char* s : kSlots) t.columns.push_back(std::string("v_slip_") + s);
  for (const char* s : kSlots) t.columns.push_back(std::string("v_cl_") + s);
  const auto vcl = recs.empty() ? std::array<std::vector<double>, 4>{}
                                : contact_line_velocities(recs, cfg.exp.vcl_window);
  for (size_t i = 0; i < recs.size(); ++i) {
    std::vector<double> row{recs[i].t};
    row.insert(row.end(), recs[i].v_slip.begin(), recs[i].v_slip.end());
    for (int k = 0; k < 4; ++k) row.push_back(i < vcl[k].size() ? vcl[k][i] : std::nan(""));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable interface_table(const RunConfig& cfg, const std::vector<InterfaceCurve>& curves) {
  CsvTable t;
  t.comments = metadata_lines(cfg);
  t.comments.push_back("curve c, arc length s, point (x, y)");
  t.columns = {"curve", "s", "x", "y"};
  for (size_t c = 0; c < curves.size(); ++c) {
    double s = 0.0;
    const auto& p = curves[c].pts;
    for (size_t i = 0; i < p.size(); ++i) {
      if (i) s += (p[i] - p[i - 1]).norm();
      t.rows.push_back({double(c), s, p[i].x(), p[i].y()});
    }
  }
  return t;
}

CsvTable limit_table(const RunConfig& cfg, const LimitCheckReport& rep) {
  CsvTable t;
  t.comments = metadata_lines(cfg);
  for (size_t i = 0; i < rep.rows.size(); ++i)
    t.comments.push_back("row " + std::to_string(i) + ": " + rep.rows[i].relation + " = " + rep.rows[i].definition);
  t.columns = {"row", "t", "residual", "tolerance", "pass"};
  for (size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    t.rows.push_back({double(i), r.t, r.residual, r.tolerance, r.pass ? 1.0 : 0.0});
  }
  return t;
}

std::string render_svg(const std::string& title, const std::vector<SvgSeries>& series,
                       const std::vector<std::string>& metadata) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (const auto& c : s.curves)
      for (const auto& p : c.pts) {
        x0 = std::min(x0, p.x());
        x1 = std::max(x1, p.x());
        y0 = std::min(y0, p.y());
        y1 = std::max(y1, p.y());
      }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  const double padx = std::max(0.05 * (x1 - x0), 1e-3), pady = std::max(0.05 * (y1 - y0), 1e-3);
  x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;
  const double W = 640.0, H = 480.0, left = 60.0, top = 40.0, pw = W - left - 150.0, ph = H - top - 50.0;
  const double scale = std::min(pw / (x1 - x0), ph / (y1 - y0));
  auto X = [&](double x) { return left + (x - x0) * scale; };
  auto Y = [&](double y) { return top + ph - (y - y0) * scale; };

  std::ostringstream o;
  o.precision(6);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!--\n";
  for (const auto& m : metadata) {
    std::string line = m;
    for (size_t pos; (pos = line.find("--")) != std::string::npos;) line.replace(pos, 2, "- -");
    o << "# " << line << "\n";
  }
  o << "-->\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << " " << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(title)
    << "</text>\n";
  o << "<rect x=\"" << X(x0) << "\" y=\"" << Y(y1) << "\" width=\"" << (x1 - x0) * scale << "\" height=\""
    << (y1 - y0) * scale << "\" fill=\"none\" stroke=\"#888\"/>\n";
  o << "<text x=\"" << X(x0) << "\" y=\"" << Y(y0) + 16 << "\" font-family=\"sans-serif\" font-size=\"11\">x "
    << x0 << "</text>\n";
  o << "<text x=\"" << X(x1) - 40 << "\" y=\"" << Y(y0) + 16 << "\" font-family=\"sans-serif\" font-size=\"11\">x "
    << x1 << "</text>\n";
  o << "<text x=\"4\" y=\"" << Y(y0) << "\" font-family=\"sans-serif\" font-size=\"11\">y " << y0 << "</text>\n";
  o << "<text x=\"4\" y=\"" << Y(y1) + 10 << "\" font-family=\"sans-serif\" font-size=\"11\">y " << y1
    << "</text>\n";
  for (size_t k = 0; k < series.size(); ++k) {
    const char* col = palette[k % 6];
    o << "<g stroke=\"" << col << "\" fill=\"none\" stroke-width=\"1.5\">\n";
    for (const auto& c : series[k].curves) {
      if (c.pts.empty()) continue;
      o << "<polyline points=\"";
      for (size_t i = 0; i < c.pts.size(); ++i) o << (i ? " " : "") << X(c.pts[i].x()) << "," << Y(c.pts[i].y());
      if (c.closed) o << " " << X(c.pts[0].x()) << "," << Y(c.pts[0].y());
      o << "\"/>\n";
    }
    o << "</g>\n";
    const double ly = top + 16.0 * (k + 1);
    o << "<line x1=\"" << W - 140 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - 115 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - 110 << "\" y=\"" << ly << "\" font-family=\"sans-serif\" font-size=\"12\">"
      << xml_escape(series[k].label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string summary_text(const ConvergenceReport& rep) {
  std::ostringstream o;
  char buf[256];
  for (const auto& [k, c] : rep.cells) {
    std::snprintf(buf, sizeof buf, "eps=%g alpha=%g beta=%g: ", std::get<0>(k), std::get<1>(k), std::get<2>(k));
    o << buf;
    if (!c.ok) {
      o << "FAILED " << c.error << "\n";
      continue;
    }
    o << "theta(deg)";
    for (int s = 0; s < 4; ++s) {
      std::snprintf(buf, sizeof buf, " %s=%.3f", kSlots[s], c.theta[s].empty() ? std::nan("") : c.theta[s].back());
      o << buf;
    }
    o << "\n";
    for (const auto& r : c.limits.rows) {
      std::snprintf(buf, sizeof buf, "  %-16s residual=%.3e tol=%.3g %s\n", r.relation.c_str(), r.residual,
                    r.tolerance, r.pass ? "pass" : "FAIL");
      o << buf;
    }
  }
  for (const auto& d : rep.distances) {
    std::snprintf(buf, sizeof buf, "distance alpha=%g beta=%g eps %g -> %g: %.4e\n", d.alpha, d.beta, d.eps_coarse,
                  d.eps_fine, d.distance);
    o << buf;
  }
  return o.str();
}

void emit_outputs(const ConvergenceReport& rep, const RunConfig& cfg, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir + "': " + ec.message());
  const auto meta = metadata_lines(cfg);

  CsvTable cells;
  cells.comments = meta;
  cells.columns = {"eps", "alpha", "beta", "ok"};
  for (const char* s : kSlots) cells.columns.push_back(std::string("theta_") + s);
  for (const char* s : kSlots) cells.columns.push_back(std::string("gnbc_") + s);
  for (const char* s : kSlots) cells.columns.push_back(std::string("case_") + s);
  for (const auto& [k, c] : rep.cells) {
    std::vector<double> row{std::get<0>(k), std::get<1>(k), std::get<2>(k), c.ok ? 1.0 : 0.0};
    for (int s = 0; s < 4; ++s) row.push_back(c.theta[s].empty() ? std::nan("") : c.theta[s].back());
    std::array<double, 4> gn, cs;
    gn.fill(std::nan(""));
    cs.fill(std::nan(""));
    for (const auto& r : c.limits.rows) {
      for (int s = 0; s < 4; ++s) {
        const std::string suffix = std::string("_") + kSlots[s];
        if (r.relation.size() < suffix.size() || r.relation.compare(r.relation.size() - 3, 3, suffix) != 0) continue;
        (r.relation.rfind("gnbc", 0) == 0 ? gn : cs)[s] = r.residual;
      }
    }
    row.insert(row.end(), gn.begin(), gn.end());
    row.insert(row.end(), cs.begin(), cs.end());
    cells.rows.push_back(std::move(row));
  }
  write_csv((fs::path(dir) / "report.csv").string(), cells);

  CsvTable dist;
  dist.comments = meta;
  dist.comments.push_back("Hausdorff distance of the bottom half of the left interface between consecutive eps");
  dist.columns = {"alpha", "beta", "eps_coarse", "eps_fine", "distance"};
  for (const auto& d : rep.distances) dist.rows.push_back({d.alpha, d.beta, d.eps_coarse, d.eps_fine, d.distance});
  write_csv((fs::path(dir) / "distances.csv").string(), dist);

  std::map<std::pair<double, double>, std::vector<SvgSeries>> groups;
  for (const auto& [k, c] : rep.cells)
    if (c.ok) groups[{std::get<1>(k), std::get<2>(k)}].push_back({eps_label(std::get<0>(k)), c.final_curves});
  for (const auto& [ab, series] : groups) {
    char name[96], title[96];
    std::snprintf(name, sizeof name, "interfaces_a%g_b%g.svg", ab.first, ab.second);
    std::snprintf(title, sizeof title, "interfaces, Ld ~ eps^%g, Vs ~ eps^%g", ab.first, ab.second);
    write_text((fs::path(dir) / name).string(), render_svg(title, series, meta));
  }

  std::string summary;
  for (const auto& m : meta) summary += "# " + m + "\n";
  write_text((fs::path(dir) / "summary.txt").string(), summary + summary_text(rep));
}

}  // namespace mcl
