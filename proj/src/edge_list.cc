#include "lrp/edge_list.h"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "lrp/errors.h"

namespace lrp {
namespace {

[[noreturn]] void Fail(std::size_t line_number, const std::string& what) {
  throw DomainError("edge list line " + std::to_string(line_number) + ": " +
                    what);
}

Site ParseSite(const std::string& token, std::size_t line_number) {
  Site value = 0;
  const auto result =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc() || result.ptr != token.data() + token.size()) {
    Fail(line_number, "bad vertex '" + token + "'");
  }
  return value;
}

double ParseReal(const std::string& token, std::size_t line_number) {
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size()) {
    Fail(line_number, "bad number '" + token + "'");
  }
  return value;
}

void ParseHeader(std::string_view line, EdgeList& out) {
  std::istringstream fields{std::string(line)};
  std::string field;
  while (fields >> field) {
    if (field.rfind("n=", 0) == 0) {
      out.window_radius = std::strtoll(field.c_str() + 2, nullptr, 10);
    } else if (field.rfind("seed=", 0) == 0) {
      out.seed = std::strtoull(field.c_str() + 5, nullptr, 10);
    }
  }
}

}  // namespace

EdgeList ParseEdgeList(std::istream& in) {
  EdgeList out;
  std::string line;
  std::size_t line_number = 0;
  bool first_comment = true;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    if (line[start] == '#') {
      if (first_comment) ParseHeader(std::string_view(line).substr(start + 1), out);
      first_comment = false;
      continue;
    }
    std::istringstream fields(line);
    std::string a, b, c, extra;
    fields >> a >> b >> c;
    if (c.empty() || (fields >> extra)) Fail(line_number, "expected 3 fields");
    if (a == "m") {
      out.marks.emplace_back(ParseSite(b, line_number), ParseReal(c, line_number));
    } else if (a == "v") {
      out.positions.emplace_back(ParseSite(b, line_number),
                                 ParseReal(c, line_number));
    } else {
      const double conductance = ParseReal(c, line_number);
      if (!(conductance >= 0.0)) Fail(line_number, "conductance must be >= 0");
      out.edges.push_back(
          {ParseSite(a, line_number), ParseSite(b, line_number), conductance});
    }
  }
  return out;
}

EdgeList ReadEdgeList(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  return ParseEdgeList(in);
}

Network NetworkFromEdgeList(const EdgeList& list) {
  std::vector<Site> sites;
  if (list.window_radius && *list.window_radius >= 0) {
    for (Site z = -*list.window_radius; z <= *list.window_radius; ++z) {
      sites.push_back(z);
    }
  }
  for (const auto& [z, mark] : list.marks) sites.push_back(z);
  for (const auto& [id, position] : list.positions) sites.push_back(id);
  return Network::Build(std::move(sites), list.edges);
}

void WriteEdges(std::ostream& out, const std::vector<std::string>& header,
                const std::vector<WeightedEdge>& edges) {
  for (const auto& line : header) out << "# " << line << "\n";
  for (const auto& e : edges) {
    out << e.u << " " << e.v << " " << FormatReal(e.conductance) << "\n";
  }
}

}  // namespace lrp
