#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "odec/nn/mlp.hpp"

namespace odec::nn {

/// Text checkpoint holding named networks plus free-form metadata.
///
///   odec-checkpoint 1
///   meta <key> <value>
///   net <name>
///   layers <count> <w0> <w1> ...
///   activation <tanh|relu|linear>
///   params <n>
///   <n hexfloat values, one per line>
///   end
///
/// Values are written as hexadecimal floating point, so a save/load cycle is bit-exact.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Mlp>> nets;

  const Mlp& net(const std::string& name) const {
    for (const auto& [n, m] : nets)
      if (n == name) return m;
    throw Error(ErrorCode::SchemaError, "checkpoint has no network '" + name + "'");
  }
  const std::string& meta_value(const std::string& key) const {
    auto it = meta.find(key);
    if (it == meta.end()) throw Error(ErrorCode::SchemaError, "checkpoint lacks metadata '" + key + "'");
    return it->second;
  }
};

inline constexpr int kCheckpointVersion = 1;

inline void write_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
  os << "odec-checkpoint " << kCheckpointVersion << '\n';
  for (const auto& [k, v] : ckpt.meta) os << "meta " << k << ' ' << v << '\n';
  char buf[64];
  for (const auto& [name, net] : ckpt.nets) {
    os << "net " << name << '\n';
    os << "layers " << net.layer_sizes().size();
    for (int w : net.layer_sizes()) os << ' ' << w;
    os << '\n' << "activation " << to_string(net.hidden_activation()) << '\n';
    os << "params " << net.parameter_count() << '\n';
    for (Eigen::Index i = 0; i < net.parameter_count(); ++i) {
      std::snprintf(buf, sizeof buf, "%a", net.parameters()[i]);
      os << buf << '\n';
    }
    os << "end\n";
  }
}

inline Checkpoint read_checkpoint(std::istream& is) {
  Checkpoint ckpt;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) -> Error {
    return Error(ErrorCode::ParseError, "checkpoint line " + std::to_string(line_no) + ": " + msg);
  };
  auto next_line = [&]() -> std::string& {
    if (!std::getline(is, line)) throw fail("unexpected end of file");
    ++line_no;
    return line;
  };

  {
    std::istringstream hs(next_line());
    std::string magic;
    int version = 0;
    hs >> magic >> version;
    if (magic != "odec-checkpoint") throw fail("bad magic");
    if (version != kCheckpointVersion) throw fail("unsupported version " + std::to_string(version));
  }
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "meta") {
      std::string key, value;
      ls >> key;
      std::getline(ls >> std::ws, value);
      if (key.empty()) throw fail("empty metadata key");
      ckpt.meta[key] = value;
    } else if (tag == "net") {
      std::string name;
      ls >> name;
      std::istringstream lay(next_line());
      std::string t;
      std::size_t count = 0;
      lay >> t >> count;
      if (t != "layers" || count < 2) throw fail("expected layer header");
      std::vector<int> sizes(count);
      for (auto& s : sizes)
        if (!(lay >> s)) throw fail("truncated layer sizes");
      std::istringstream act(next_line());
      std::string act_name;
      act >> t >> act_name;
      if (t != "activation") throw fail("expected activation");
      Mlp net(sizes, activation_from_string(act_name));
      std::istringstream ps(next_line());
      Eigen::Index n = 0;
      ps >> t >> n;
      if (t != "params" || n != net.parameter_count()) throw fail("parameter count does not match layers");
      Vector p(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::string& v = next_line();
        char* end = nullptr;
        p[i] = std::strtod(v.c_str(), &end);
        if (end == v.c_str()) throw fail("bad parameter value");
      }
      if (next_line() != "end") throw fail("missing end marker");
      net.set_parameters(p);
      ckpt.nets.emplace_back(name, std::move(net));
    } else {
      throw fail("unknown record '" + tag + "'");
    }
  }
  return ckpt;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path);
  write_checkpoint(os, ckpt);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot read " + path);
  return read_checkpoint(is);
}

}  // namespace odec::nn
