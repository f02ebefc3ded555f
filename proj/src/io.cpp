#include "bicr/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "bicr/errors.hpp"

namespace bicr {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Non-empty, non-comment lines with their 1-based line numbers.
struct Line {
  std::size_t number;
  std::string_view text;
};

std::vector<Line> content_lines(std::string_view text, std::vector<std::string_view>* comments) {
  std::vector<Line> out;
  std::size_t number = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++number;
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (comments != nullptr) comments->push_back(line);
      continue;
    }
    out.push_back({number, line});
  }
  return out;
}

[[noreturn]] void format_error(std::size_t line, const std::string& what) {
  throw ArgumentError("line " + std::to_string(line) + ": " + what);
}

std::size_t parse_index(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    format_error(line, "expected a nonnegative integer, got '" + std::string(s) + "'");
  }
  return v;
}

double parse_real(std::string_view s, std::size_t line) {
  try {
    return parse_double(s);
  } catch (const ArgumentError& e) {
    format_error(line, e.what());
  }
}

void expect_header(const std::vector<Line>& lines, std::vector<std::string_view> want, char sep) {
  std::string joined;
  for (std::size_t k = 0; k < want.size(); ++k) {
    if (k > 0) joined += sep == '\t' ? "\\t" : ",";
    joined += want[k];
  }
  if (lines.empty()) throw ArgumentError("missing header '" + joined + "'");
  if (split(lines.front().text, sep) != want) {
    format_error(lines.front().number, "expected header '" + joined + "'");
  }
}

void check_fields(const std::vector<std::string_view>& fields, std::size_t want, std::size_t line) {
  if (fields.size() != want) {
    format_error(line, "expected " + std::to_string(want) + " fields, got " +
                           std::to_string(fields.size()));
  }
}

// Value of `key=` inside a "# a=1 b=2" metadata line, if present.
std::optional<std::string_view> metadata(const std::vector<std::string_view>& comments,
                                         std::string_view key) {
  for (std::string_view c : comments) {
    for (std::string_view tok : split(trim(c.substr(1)), ' ')) {
      const auto eq = tok.find('=');
      if (eq != std::string_view::npos && tok.substr(0, eq) == key) return tok.substr(eq + 1);
    }
  }
  return std::nullopt;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw ArgumentError("cannot format double");
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ArgumentError("expected a decimal number, got '" + std::string(text) + "'");
  }
  return v;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ResourceError("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw ResourceError("failed writing '" + path + "'");
}

BipartiteGraph parse_graph_tsv(std::string_view text) {
  std::vector<std::string_view> comments;
  const auto lines = content_lines(text, &comments);
  expect_header(lines, {"exp_id", "int_id", "weight"}, '\t');
  std::vector<Edge> edges;
  std::size_t n = 0;
  std::size_t m = 0;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto f = split(lines[k].text, '\t');
    check_fields(f, 3, lines[k].number);
    Edge e{parse_index(f[0], lines[k].number), parse_index(f[1], lines[k].number),
           parse_real(f[2], lines[k].number)};
    n = std::max(n, e.exp + 1);
    m = std::max(m, e.intf + 1);
    edges.push_back(e);
  }
  if (auto v = metadata(comments, "n_experimental")) n = parse_index(*v, 1);
  if (auto v = metadata(comments, "n_interference")) m = parse_index(*v, 1);
  return BipartiteGraph(n, m, std::move(edges));
}

std::string format_graph_tsv(const BipartiteGraph& g) {
  std::string out = "# n_experimental=" + std::to_string(g.n_experimental()) +
                    " n_interference=" + std::to_string(g.n_interference()) +
                    "\nexp_id\tint_id\tweight\n";
  for (const Edge& e : g.edges()) {
    out += std::to_string(e.exp);
    out += '\t';
    out += std::to_string(e.intf);
    out += '\t';
    out += format_double(e.weight);
    out += '\n';
  }
  return out;
}

BipartiteGraph parse_graph_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("invalid graph JSON: ") + e.what());
  }
  try {
    std::vector<Edge> edges;
    std::size_t n = 0;
    std::size_t m = 0;
    for (const auto& item : doc.at("edges")) {
      Edge e{item.at("exp_id").get<std::size_t>(), item.at("int_id").get<std::size_t>(),
             item.at("weight").get<double>()};
      n = std::max(n, e.exp + 1);
      m = std::max(m, e.intf + 1);
      edges.push_back(e);
    }
    if (doc.contains("n_experimental")) n = doc["n_experimental"].get<std::size_t>();
    if (doc.contains("n_interference")) m = doc["n_interference"].get<std::size_t>();
    return BipartiteGraph(n, m, std::move(edges));
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed graph JSON: ") + e.what());
  }
}

std::string format_graph_json(const BipartiteGraph& g) {
  nlohmann::ordered_json doc;
  doc["n_experimental"] = g.n_experimental();
  doc["n_interference"] = g.n_interference();
  doc["edges"] = nlohmann::ordered_json::array();
  for (const Edge& e : g.edges()) {
    doc["edges"].push_back({{"exp_id", e.exp}, {"int_id", e.intf}, {"weight", e.weight}});
  }
  return doc.dump(2) + "\n";
}

BipartiteGraph read_graph(const std::string& path) {
  const std::string text = read_text_file(path);
  return ends_with(path, ".json") ? parse_graph_json(text) : parse_graph_tsv(text);
}

void write_graph(const std::string& path, const BipartiteGraph& g) {
  write_text_file(path, ends_with(path, ".json") ? format_graph_json(g) : format_graph_tsv(g));
}

bool looks_like_folded_tsv(std::string_view text) {
  const auto lines = content_lines(text, nullptr);
  return !lines.empty() && split(lines.front().text, '\t') ==
                               std::vector<std::string_view>{"i", "j", "weight"};
}

FoldedGraph parse_folded_tsv(std::string_view text) {
  std::vector<std::string_view> comments;
  const auto lines = content_lines(text, &comments);
  expect_header(lines, {"i", "j", "weight"}, '\t');
  std::vector<std::pair<std::size_t, Neighbor>> entries;
  std::size_t n = 0;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto f = split(lines[k].text, '\t');
    check_fields(f, 3, lines[k].number);
    const std::size_t i = parse_index(f[0], lines[k].number);
    const std::size_t j = parse_index(f[1], lines[k].number);
    const double w = parse_real(f[2], lines[k].number);
    if (!std::isfinite(w) || w < 0.0) format_error(lines[k].number, "invalid weight");
    n = std::max({n, i + 1, j + 1});
    entries.push_back({i, {j, w}});
  }
  if (auto v = metadata(comments, "n")) {
    const std::size_t declared = parse_index(*v, 1);
    if (declared < n) throw ArgumentError("folded graph declares n=" + std::string(*v) +
                                          " but references unit " + std::to_string(n - 1));
    n = declared;
  }
  NormalizationMode mode = NormalizationMode::full();
  if (auto v = metadata(comments, "mode")) mode = NormalizationMode::parse(*v);

  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second.index < b.second.index;
  });
  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<Neighbor> flat;
  flat.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (k > 0 && entries[k].first == entries[k - 1].first &&
        entries[k].second.index == entries[k - 1].second.index) {
      throw ArgumentError("duplicate folded entry (" + std::to_string(entries[k].first) + ", " +
                          std::to_string(entries[k].second.index) + ")");
    }
    ++offsets[entries[k].first + 1];
    flat.push_back(entries[k].second);
  }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  return FoldedGraph(n, std::move(offsets), std::move(flat), mode);
}

std::string format_folded_tsv(const FoldedGraph& f) {
  std::string out = "# n=" + std::to_string(f.n()) + " mode=" + f.mode().code() + "\ni\tj\tweight\n";
  for (std::size_t i = 0; i < f.n(); ++i) {
    for (const Neighbor& nb : f.row(i)) {
      out += std::to_string(i);
      out += '\t';
      out += std::to_string(nb.index);
      out += '\t';
      out += format_double(nb.weight);
      out += '\n';
    }
  }
  return out;
}

namespace {

// Two-column CSV keyed by dense unit ids, returned in id order.
template <typename T, typename Parse>
std::vector<T> parse_keyed_csv(std::string_view text, std::string_view value_column, Parse parse) {
  const auto lines = content_lines(text, nullptr);
  expect_header(lines, {"unit_id", value_column}, ',');
  std::vector<T> values(lines.size() - 1);
  std::vector<char> seen(lines.size() - 1, 0);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto f = split(lines[k].text, ',');
    check_fields(f, 2, lines[k].number);
    const std::size_t id = parse_index(f[0], lines[k].number);
    if (id >= values.size()) {
      format_error(lines[k].number, "unit ids must be dense in [0, " +
                                        std::to_string(values.size()) + ")");
    }
    if (seen[id]) format_error(lines[k].number, "duplicate unit id " + std::to_string(id));
    seen[id] = 1;
    values[id] = parse(f[1], lines[k].number);
  }
  return values;
}

}  // namespace

std::vector<std::size_t> parse_clustering_csv(std::string_view text) {
  return parse_keyed_csv<std::size_t>(text, "cluster_id", parse_index);
}

std::string format_clustering_csv(std::span<const std::size_t> labels) {
  std::string out = "unit_id,cluster_id\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(labels[i]) + "\n";
  }
  return out;
}

Clustering read_clustering(const std::string& path, std::size_t n, double tolerance) {
  std::vector<std::size_t> labels = parse_clustering_csv(read_text_file(path));
  if (labels.size() < n) {
    throw ArgumentError("clustering '" + path + "' labels " + std::to_string(labels.size()) +
                        " units, graph has " + std::to_string(n));
  }
  labels.resize(n);
  return Clustering::from_labels(std::move(labels), tolerance);
}

std::string format_labels_csv(std::span<const std::size_t> exp_labels,
                              std::span<const std::size_t> int_labels) {
  std::string out = "unit_id,label,side\n";
  for (std::size_t i = 0; i < exp_labels.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(exp_labels[i]) + ",exp\n";
  }
  for (std::size_t s = 0; s < int_labels.size(); ++s) {
    out += std::to_string(s) + "," + std::to_string(int_labels[s]) + ",int\n";
  }
  return out;
}

Assignment parse_assignment_csv(std::string_view text) {
  Assignment a;
  a.z = parse_keyed_csv<int>(text, "z", [](std::string_view s, std::size_t line) {
    if (s == "1" || s == "+1") return 1;
    if (s == "-1") return -1;
    format_error(line, "z must be -1 or 1, got '" + std::string(s) + "'");
  });
  return a;
}

std::string format_assignment_csv(const Assignment& a) {
  a.validate();
  std::string out = "unit_id,z\n";
  for (std::size_t i = 0; i < a.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(a.z[i]) + "\n";
  }
  return out;
}

LinearCoefficients parse_coefficients_csv(std::string_view text) {
  const auto lines = content_lines(text, nullptr);
  expect_header(lines, {"unit_id", "alpha", "beta", "gamma"}, ',');
  const std::size_t n = lines.size() - 1;
  LinearCoefficients c;
  c.alpha.resize(n);
  c.beta.resize(n);
  c.gamma.resize(n);
  std::vector<char> seen(n, 0);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto f = split(lines[k].text, ',');
    check_fields(f, 4, lines[k].number);
    const std::size_t id = parse_index(f[0], lines[k].number);
    if (id >= n || seen[id]) format_error(lines[k].number, "unit ids must be dense and unique");
    seen[id] = 1;
    c.alpha[id] = parse_real(f[1], lines[k].number);
    c.beta[id] = parse_real(f[2], lines[k].number);
    c.gamma[id] = parse_real(f[3], lines[k].number);
  }
  c.validate();
  return c;
}

std::string format_coefficients_csv(const LinearCoefficients& c) {
  c.validate();
  std::string out = "unit_id,alpha,beta,gamma\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    out += std::to_string(i) + "," + format_double(c.alpha[i]) + "," + format_double(c.beta[i]) +
           "," + format_double(c.gamma[i]) + "\n";
  }
  return out;
}

}  // namespace bicr
