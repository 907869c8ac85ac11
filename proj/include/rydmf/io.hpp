#pragma once

// Deterministic CSV serialization. Doubles are written in their shortest
// round-trip decimal form, so identical results give identical bytes and
// parsing a file reproduces the values exactly.

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "rydmf/core.hpp"
#include "rydmf/dynamics.hpp"
#include "rydmf/kick_calibration.hpp"
#include "rydmf/protocols.hpp"

namespace rydmf::io {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ValidationError("not a number: '" + s + "'");
  return v;
}

inline std::string unit_of(const std::string& column) {
  static const std::map<std::string, std::string> units{
      {"t", "1/gamma"},         {"sigma_x", "1"},        {"sigma_y", "1"},         {"n_r", "1"},
      {"delta_c", "gamma"},     {"detuning", "gamma"},   {"transmission", "arb"},  {"omega", "gamma"},
      {"frequency", "gamma"},   {"power", "1"},          {"dtc_order", "1"},       {"power_f", "1"},
      {"power_half", "1"},      {"amplitude", "gamma"},  {"alternation", "1"},     {"forward_n_r", "1"},
      {"backward_n_r", "1"},    {"difference", "1"},     {"sweep_difference", "1"}, {"stable_count", "1"},
      {"label", "index"},       {"rho_gg", "1"},         {"trace", "1"},           {"purity", "1"},
      {"sup_norm", "1"},        {"kick_amplitude", "gamma"}, {"kick_duration", "1/gamma"},
      {"period", "1/gamma"},    {"index", "1"},          {"stability", "class"},   {"ev_re", "gamma"},
      {"ev_im", "gamma"},       {"draw", "index"},       {"error", "text"}};
  std::string base = column;
  if (base.starts_with("ev_re")) base = "ev_re";
  if (base.starts_with("ev_im")) base = "ev_im";
  const auto it = units.find(base);
  return it == units.end() ? "1" : it->second;
}

/// Simple rectangular table with named columns; cells are strings.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> r) {
    if (r.size() != columns.size()) throw ValidationError("row width mismatch");
    rows.push_back(std::move(r));
  }

  std::size_t column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw ValidationError("missing column '" + name + "'");
  }

  std::vector<double> numeric(const std::string& name) const {
    const auto c = column_index(name);
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(parse_double(r[c]));
    return v;
  }
};

/// Header cells are "name[unit]".
inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    os << (i ? "," : "") << t.columns[i] << '[' << unit_of(t.columns[i]) << ']';
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline Table read_csv(std::istream& is) {
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("empty CSV");
  for (auto& h : split_line(line)) {
    const auto bracket = h.find('[');
    t.columns.push_back(bracket == std::string::npos ? h : h.substr(0, bracket));
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.add_row(split_line(line));
  }
  return t;
}

inline void write_csv_file(const std::string& path, const Table& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(f, t);
}

// ---------------------------------------------------------------------------
// Result types
// ---------------------------------------------------------------------------

inline Table to_table(const TimeSeries& ts) {
  Table t;
  t.columns.push_back("t");
  const auto names = ts.channel_names();
  for (const auto& n : names) t.columns.push_back(n);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::vector<std::string> r{format_double(ts.time(i))};
    for (const auto& n : names) r.push_back(format_double(ts.channel(n)[i]));
    t.add_row(std::move(r));
  }
  return t;
}

/// Inverse of to_table(TimeSeries); t0 and dt are taken from the first two rows.
inline TimeSeries time_series_from_table(const Table& t) {
  const auto times = t.numeric("t");
  if (times.size() < 2) throw ValidationError("time series CSV needs at least 2 rows");
  TimeSeries ts(times[0], times[1] - times[0]);
  for (const auto& c : t.columns)
    if (c != "t") ts.add_channel(c, t.numeric(c));
  return ts;
}

inline Table to_table(const std::vector<FixedPoint>& fps) {
  Table t;
  t.columns = {"index", "sigma_x", "sigma_y", "n_r", "stability", "ev_re0", "ev_im0", "ev_re1", "ev_im1", "ev_re2", "ev_im2"};
  for (std::size_t i = 0; i < fps.size(); ++i) {
    const auto& f = fps[i];
    std::vector<std::string> r{std::to_string(i), format_double(f.state.sigma_x), format_double(f.state.sigma_y),
                               format_double(f.state.n_r), to_string(f.stability)};
    for (const auto& ev : f.eigenvalues) {
      r.push_back(format_double(ev.real()));
      r.push_back(format_double(ev.imag()));
    }
    t.add_row(std::move(r));
  }
  return t;
}

inline Table to_table(const BasinMap& m) {
  Table t;
  const int fixed = 3 - static_cast<int>(m.plane.horizontal) - static_cast<int>(m.plane.vertical);
  t.columns = {to_string(m.plane.horizontal), to_string(m.plane.vertical),
               to_string(static_cast<Coordinate>(fixed)), "label"};
  for (std::size_t iv = 0; iv < m.v_axis.size(); ++iv)
    for (std::size_t ih = 0; ih < m.h_axis.size(); ++ih)
      t.add_row({format_double(m.h_axis[ih]), format_double(m.v_axis[iv]), format_double(*m.plane.fixed_value),
                 std::to_string(m.label(ih, iv))});
  return t;
}

inline Table to_table(const SweepResult& s) {
  Table t;
  t.columns = {"detuning", "forward_n_r", "backward_n_r", "difference"};
  for (std::size_t i = 0; i < s.detuning.size(); ++i)
    t.add_row({format_double(s.detuning[i]), format_double(s.forward[i]), format_double(s.backward[i]),
               format_double(s.difference[i])});
  return t;
}

/// Long format over one or more maps sharing axes: x, y, then one column per map.
inline Table to_table(const std::vector<const PhaseMap*>& layers) {
  if (layers.empty()) throw ValidationError("no phase map layers");
  const PhaseMap& ref = *layers.front();
  Table t;
  t.columns = {ref.x_label, ref.y_label};
  for (const auto* l : layers) {
    if (l->x != ref.x || l->y != ref.y) throw ValidationError("phase map layers must share axes");
    t.columns.push_back(l->semantics);
  }
  for (std::size_t iy = 0; iy < ref.y.size(); ++iy)
    for (std::size_t ix = 0; ix < ref.x.size(); ++ix) {
      std::vector<std::string> r{format_double(ref.x[ix]), format_double(ref.y[iy])};
      for (const auto* l : layers) r.push_back(format_double(l->at(ix, iy)));
      t.add_row(std::move(r));
    }
  return t;
}

inline Table to_table(const PhaseMap& m) { return to_table(std::vector<const PhaseMap*>{&m}); }

/// Reconstructs the layer named `semantics` from a long-format table.
inline PhaseMap phase_map_from_table(const Table& t, const std::string& semantics) {
  if (t.columns.size() < 3) throw ValidationError("phase map CSV needs x, y and a value column");
  const auto xs = t.numeric(t.columns[0]);
  const auto ys = t.numeric(t.columns[1]);
  const auto vs = t.numeric(semantics);
  std::vector<double> x, y;
  for (double v : xs) {
    if (std::find(x.begin(), x.end(), v) == x.end()) x.push_back(v);
  }
  for (double v : ys) {
    if (std::find(y.begin(), y.end(), v) == y.end()) y.push_back(v);
  }
  PhaseMap m(t.columns[0], x, t.columns[1], y, semantics);
  if (vs.size() != m.values.size()) throw ValidationError("phase map CSV is not a full grid");
  m.values = vs;
  return m;
}

/// Free text safe for an unquoted CSV cell.
inline std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '"') c = ';';
  return s;
}

inline Table to_table(const std::vector<KickScanPoint>& scan) {
  Table t;
  t.columns = {"amplitude", "dtc_order", "alternation", "error"};
  for (const auto& p : scan)
    t.add_row({format_double(p.amplitude), format_double(p.dtc_order), format_double(p.alternation),
               p.error ? sanitize(*p.error) : ""});
  return t;
}

inline Table to_table(const LocalProfile& p) {
  Table t;
  t.columns = {"detuning", "power_f", "power_half", "dtc_order"};
  for (std::size_t i = 0; i < p.detuning.size(); ++i)
    t.add_row({format_double(p.detuning[i]), format_double(p.power_f[i]), format_double(p.power_half[i]),
               format_double(p.dtc_order[i])});
  return t;
}

}  // namespace rydmf::io
