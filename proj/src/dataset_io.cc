#include "fwdlearn/dataset_io.h"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fwdlearn/binary_io.h"
#include "fwdlearn/status.h"

namespace fwdlearn {

namespace {

constexpr char kTextMagic[] = "fwdt";
constexpr char kBinaryMagic[4] = {'F', 'W', 'D', 'B'};
constexpr std::uint32_t kFormatVersion = 1;

std::string FormatReal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ParseReal(const std::string& token, const std::string& context) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size() || errno == ERANGE) {
    throw DataError("bad real '" + token + "' in " + context);
  }
  return v;
}

long ParseInt(const std::string& token, const std::string& context) {
  errno = 0;
  char* end = nullptr;
  long v = std::strtol(token.c_str(), &end, 10);
  if (token.empty() || end != token.c_str() + token.size() || errno == ERANGE) {
    throw DataError("bad integer '" + token + "' in " + context);
  }
  return v;
}

std::string JoinReals(const Eigen::VectorXd& v) {
  std::string s;
  for (int i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += FormatReal(v[i]);
  }
  return s;
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

Eigen::VectorXd ParseRealList(const std::string& s, const std::string& key) {
  auto items = SplitList(s);
  Eigen::VectorXd v(static_cast<int>(items.size()));
  for (size_t i = 0; i < items.size(); ++i) v[i] = ParseReal(items[i], key);
  return v;
}

std::string HeaderText(const Dataset& dataset, bool with_sources) {
  const SystemSpec& s = dataset.system;
  std::ostringstream out;
  out << "system=" << s.name << '\n'
      << "state_dim=" << s.state_dim << '\n'
      << "action_dim=" << s.action_dim << '\n'
      << "dt=" << FormatReal(s.dt) << '\n'
      << "pos_dim=" << s.pos_dim << '\n'
      << "wrap_positions=" << (s.wrap_positions ? 1 : 0) << '\n'
      << "action_low=" << JoinReals(s.action_low) << '\n'
      << "action_high=" << JoinReals(s.action_high) << '\n';
  for (const auto& [key, value] : s.params) {
    out << "param." << key << '=' << FormatReal(value) << '\n';
  }
  std::string provenance;
  for (const auto& name : dataset.Provenance()) {
    if (!provenance.empty()) provenance += ',';
    provenance += name;
  }
  out << "provenance=" << provenance << '\n';
  out << "episodes=" << dataset.episodes.size() << '\n';
  if (with_sources) {
    out << "sources=";
    for (size_t i = 0; i < dataset.episodes.size(); ++i) {
      if (i) out << ',';
      out << dataset.episodes[i].source();
    }
    out << '\n';
  }
  return out.str();
}

using HeaderMap = std::map<std::string, std::string>;

void AddHeaderLine(HeaderMap& header, const std::string& line) {
  auto eq = line.find('=');
  if (eq == std::string::npos) throw DataError("bad header line '" + line + "'");
  header[line.substr(0, eq)] = line.substr(eq + 1);
}

const std::string& Require(const HeaderMap& header, const std::string& key) {
  auto it = header.find(key);
  if (it == header.end()) throw DataError("dataset header lacks '" + key + "'");
  return it->second;
}

SystemSpec SystemFromHeader(const HeaderMap& header) {
  SystemSpec spec;
  spec.name = Require(header, "system");
  spec.state_dim = static_cast<int>(ParseInt(Require(header, "state_dim"), "state_dim"));
  spec.action_dim =
      static_cast<int>(ParseInt(Require(header, "action_dim"), "action_dim"));
  spec.dt = ParseReal(Require(header, "dt"), "dt");
  spec.pos_dim = static_cast<int>(ParseInt(Require(header, "pos_dim"), "pos_dim"));
  spec.wrap_positions = ParseInt(Require(header, "wrap_positions"), "wrap_positions") != 0;
  spec.action_low = ParseRealList(Require(header, "action_low"), "action_low");
  spec.action_high = ParseRealList(Require(header, "action_high"), "action_high");
  for (const auto& [key, value] : header) {
    if (key.rfind("param.", 0) == 0) {
      spec.params[key.substr(6)] = ParseReal(value, key);
    }
  }
  try {
    spec.Validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("invalid system in dataset header: ") + e.what());
  }
  return spec;
}

}  // namespace

void WriteDatasetText(const Dataset& dataset, std::ostream& out) {
  dataset.Validate();
  out << kTextMagic << ' ' << kFormatVersion << '\n' << HeaderText(dataset, false);
  for (const auto& e : dataset.episodes) {
    out << "episode " << e.length() << ' ' << e.source() << '\n';
    for (int t = 0; t <= e.length(); ++t) {
      for (int i = 0; i < e.state_dim(); ++i) {
        if (i) out << ' ';
        out << FormatReal(e.states()(i, t));
      }
      if (t < e.length()) {
        for (int i = 0; i < e.action_dim(); ++i) {
          out << ' ' << FormatReal(e.actions()(i, t));
        }
      }
      out << '\n';
    }
    out << "end\n";
  }
}

Dataset ReadDatasetText(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != std::string(kTextMagic) + " 1") {
    throw DataError("not a fwdt v1 dataset");
  }
  HeaderMap header;
  Dataset dataset;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("episode ", 0) == 0) break;
    if (line.empty()) continue;
    AddHeaderLine(header, line);
  }
  dataset.system = SystemFromHeader(header);
  const long expected = ParseInt(Require(header, "episodes"), "episodes");
  const int sd = dataset.system.state_dim;
  const int ad = dataset.system.action_dim;

  while (line.rfind("episode ", 0) == 0) {
    std::istringstream head(line.substr(8));
    std::string len_token, source;
    head >> len_token >> source;
    const long length = ParseInt(len_token, "episode line " + std::to_string(line_no));
    if (length < 1) throw DataError("episode length must be >= 1");
    Eigen::MatrixXd states(sd, length + 1);
    Eigen::MatrixXd actions(ad, length);
    for (long t = 0; t <= length; ++t) {
      if (!std::getline(in, line)) throw DataError("truncated episode block");
      ++line_no;
      std::istringstream row(line);
      std::vector<std::string> tokens;
      for (std::string tok; row >> tok;) tokens.push_back(tok);
      const size_t want = t < length ? sd + ad : sd;
      if (tokens.size() != want) {
        throw DataError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(want) + " values");
      }
      const std::string ctx = "line " + std::to_string(line_no);
      for (int i = 0; i < sd; ++i) states(i, t) = ParseReal(tokens[i], ctx);
      if (t < length) {
        for (int i = 0; i < ad; ++i) actions(i, t) = ParseReal(tokens[sd + i], ctx);
      }
    }
    if (!std::getline(in, line) || line != "end") {
      throw DataError("episode block not terminated by 'end'");
    }
    ++line_no;
    dataset.episodes.emplace_back(std::move(states), std::move(actions), source);
    if (!std::getline(in, line)) break;
    ++line_no;
  }
  if (static_cast<long>(dataset.episodes.size()) != expected) {
    throw DataError("episode count does not match header");
  }
  dataset.Validate();
  return dataset;
}

void WriteDatasetBinary(const Dataset& dataset, std::ostream& out) {
  dataset.Validate();
  ByteWriter w(out);
  w.Raw(kBinaryMagic, 4);
  w.U32(kFormatVersion);
  w.String(HeaderText(dataset, true));
  w.U64(dataset.episodes.size());
  for (const auto& e : dataset.episodes) {
    w.U64(static_cast<std::uint64_t>(e.length()));
    // column-major storage is already time-major
    for (Eigen::Index k = 0; k < e.states().size(); ++k) w.F64(e.states().data()[k]);
    for (Eigen::Index k = 0; k < e.actions().size(); ++k) w.F64(e.actions().data()[k]);
  }
}

Dataset ReadDatasetBinary(std::istream& in) {
  ByteReader r(in);
  char magic[4];
  r.Raw(magic, 4);
  if (std::memcmp(magic, kBinaryMagic, 4) != 0) throw DataError("not a FWDB file");
  const std::uint32_t version = r.U32();
  if (version != kFormatVersion) {
    throw DataError("unsupported FWDB version " + std::to_string(version));
  }
  HeaderMap header;
  std::istringstream header_text(r.String());
  for (std::string line; std::getline(header_text, line);) {
    if (!line.empty()) AddHeaderLine(header, line);
  }
  Dataset dataset;
  dataset.system = SystemFromHeader(header);
  const auto sources = SplitList(Require(header, "sources"));
  const std::uint64_t n = r.U64();
  if (n != sources.size()) throw DataError("sources list does not match episode count");
  const int sd = dataset.system.state_dim;
  const int ad = dataset.system.action_dim;
  for (std::uint64_t e = 0; e < n; ++e) {
    const std::uint64_t length = r.U64();
    if (length < 1 || length > (1ull << 32)) throw DataError("bad episode length");
    Eigen::MatrixXd states(sd, static_cast<Eigen::Index>(length + 1));
    Eigen::MatrixXd actions(ad, static_cast<Eigen::Index>(length));
    for (Eigen::Index k = 0; k < states.size(); ++k) states.data()[k] = r.F64();
    for (Eigen::Index k = 0; k < actions.size(); ++k) actions.data()[k] = r.F64();
    dataset.episodes.emplace_back(std::move(states), std::move(actions), sources[e]);
  }
  dataset.Validate();
  return dataset;
}

void SaveDataset(const Dataset& dataset, const std::filesystem::path& path) {
  const auto ext = path.extension();
  if (ext == ".fwdt") {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    WriteDatasetText(dataset, out);
  } else if (ext == ".fwdb") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    WriteDatasetBinary(dataset, out);
  } else {
    throw ConfigError("dataset path must end in .fwdt or .fwdb: " + path.string());
  }
}

Dataset LoadDataset(const std::filesystem::path& path) {
  const auto ext = path.extension();
  if (ext == ".fwdt") {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return ReadDatasetText(in);
  }
  if (ext == ".fwdb") {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return ReadDatasetBinary(in);
  }
  throw ConfigError("dataset path must end in .fwdt or .fwdb: " + path.string());
}

}  // namespace fwdlearn
