#include "fwdlearn/checkpoint.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fwdlearn/binary_io.h"
#include "fwdlearn/status.h"

namespace fwdlearn {
namespace {

constexpr char kMagic[4] = {'F', 'W', 'D', 'C'};
constexpr std::uint32_t kMaxWidth = 1u << 20;

void WriteVector(ByteWriter& w, const Eigen::VectorXd& v) {
  w.U32(static_cast<std::uint32_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) w.F64(v[i]);
}

Eigen::VectorXd ReadVector(ByteReader& r) {
  const std::uint32_t n = r.U32();
  if (n > kMaxWidth) throw DataError("checkpoint vector length out of range");
  Eigen::VectorXd v(n);
  for (std::uint32_t i = 0; i < n; ++i) v[i] = r.F64();
  return v;
}

void WriteShape(ByteWriter& w, const MlpShape& shape) {
  w.String(shape.Descriptor());
  w.U32(static_cast<std::uint32_t>(shape.input));
  w.U32(static_cast<std::uint32_t>(shape.hidden.size()));
  for (int h : shape.hidden) w.U32(static_cast<std::uint32_t>(h));
  w.U32(static_cast<std::uint32_t>(shape.output));
}

MlpShape ReadShape(ByteReader& r) {
  const std::string descriptor = r.String();
  MlpShape shape;
  shape.input = static_cast<int>(r.U32());
  const std::uint32_t n_hidden = r.U32();
  if (n_hidden > 64) throw DataError("checkpoint hidden layer count out of range");
  for (std::uint32_t i = 0; i < n_hidden; ++i) {
    shape.hidden.push_back(static_cast<int>(r.U32()));
  }
  shape.output = static_cast<int>(r.U32());
  for (int width : shape.hidden) {
    if (width < 1 || width > static_cast<int>(kMaxWidth)) {
      throw DataError("checkpoint layer width out of range");
    }
  }
  if (shape.input < 1 || shape.output < 1 || shape.input > static_cast<int>(kMaxWidth) ||
      shape.output > static_cast<int>(kMaxWidth)) {
    throw DataError("checkpoint layer width out of range");
  }
  if (shape.Descriptor() != descriptor) {
    throw DataError("checkpoint architecture descriptor '" + descriptor +
                    "' does not match its widths");
  }
  return shape;
}

// raw parameter arrays in layer order, weights column-major then biases
void WriteParams(ByteWriter& w, const MlpParams& p) {
  for (const auto& layer : p.layers) {
    const Eigen::MatrixXd& m = layer.weight;
    for (Eigen::Index i = 0; i < m.size(); ++i) w.F64(m.data()[i]);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) w.F64(layer.bias[i]);
  }
}

MlpParams ReadParams(ByteReader& r, const MlpShape& shape) {
  MlpParams p = MlpParams::Zeros(shape);
  for (auto& layer : p.layers) {
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = r.F64();
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = r.F64();
  }
  return p;
}

}  // namespace

const NetworkSection& Checkpoint::Network(const std::string& name) const {
  for (const auto& n : networks) {
    if (n.name == name) return n;
  }
  throw DataError("checkpoint has no network '" + name + "'");
}

bool Checkpoint::operator==(const Checkpoint& other) const {
  // log_alpha compared bitwise
  return kind == other.kind && config_echo == other.config_echo &&
         rounds == other.rounds && window_w == other.window_w &&
         scaler == other.scaler && bounds == other.bounds &&
         std::memcmp(&log_alpha, &other.log_alpha, sizeof(double)) == 0 &&
         alpha_optimizer == other.alpha_optimizer && networks == other.networks;
}

void WriteCheckpoint(std::ostream& out, const Checkpoint& ckpt) {
  ByteWriter w(out);
  w.Raw(kMagic, sizeof(kMagic));
  w.U32(kCheckpointVersion);
  w.String(ckpt.kind);
  w.String(ckpt.config_echo);
  w.U64(ckpt.rounds);
  w.U32(static_cast<std::uint32_t>(ckpt.window_w));
  WriteVector(w, ckpt.scaler.min);
  WriteVector(w, ckpt.scaler.max);
  WriteVector(w, ckpt.bounds.low);
  WriteVector(w, ckpt.bounds.high);
  w.F64(ckpt.log_alpha);
  w.F64(ckpt.alpha_optimizer.m);
  w.F64(ckpt.alpha_optimizer.v);
  w.U64(static_cast<std::uint64_t>(ckpt.alpha_optimizer.step));
  w.U32(static_cast<std::uint32_t>(ckpt.networks.size()));
  for (const auto& net : ckpt.networks) {
    w.String(net.name);
    WriteShape(w, net.params.shape);
    WriteParams(w, net.params);
    w.U32(net.has_optimizer ? 1u : 0u);
    if (net.has_optimizer) {
      WriteParams(w, net.optimizer.m);
      WriteParams(w, net.optimizer.v);
      w.U64(static_cast<std::uint64_t>(net.optimizer.step));
    }
  }
  if (!out) throw DataError("failed writing checkpoint");
}

Checkpoint ReadCheckpoint(std::istream& in) {
  ByteReader r(in);
  char magic[4];
  r.Raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw DataError("not a checkpoint file (bad magic)");
  }
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.kind = r.String();
  ckpt.config_echo = r.String();
  ckpt.rounds = r.U64();
  ckpt.window_w = static_cast<int>(r.U32());
  ckpt.scaler.min = ReadVector(r);
  ckpt.scaler.max = ReadVector(r);
  ckpt.bounds.low = ReadVector(r);
  ckpt.bounds.high = ReadVector(r);
  if (ckpt.scaler.min.size() != ckpt.scaler.max.size() ||
      ckpt.bounds.low.size() != ckpt.bounds.high.size()) {
    throw DataError("checkpoint scaler or bounds widths disagree");
  }
  ckpt.log_alpha = r.F64();
  ckpt.alpha_optimizer.m = r.F64();
  ckpt.alpha_optimizer.v = r.F64();
  ckpt.alpha_optimizer.step = static_cast<std::int64_t>(r.U64());
  const std::uint32_t n_networks = r.U32();
  if (n_networks > 64) throw DataError("checkpoint network count out of range");
  for (std::uint32_t i = 0; i < n_networks; ++i) {
    NetworkSection net;
    net.name = r.String();
    const MlpShape shape = ReadShape(r);
    net.params = ReadParams(r, shape);
    net.has_optimizer = r.U32() != 0;
    if (net.has_optimizer) {
      net.optimizer.m = ReadParams(r, shape);
      net.optimizer.v = ReadParams(r, shape);
      net.optimizer.step = static_cast<std::int64_t>(r.U64());
    }
    ckpt.networks.push_back(std::move(net));
  }
  return ckpt;
}

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp + "' for writing");
    WriteCheckpoint(out, ckpt);
    out.flush();
    if (!out) throw DataError("failed writing '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw DataError("cannot move checkpoint into '" + path + "'");
  }
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  try {
    return ReadCheckpoint(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

Policy PolicyFromCheckpoint(const Checkpoint& ckpt) {
  const NetworkSection& actor = ckpt.Network("actor");
  if (actor.params.shape.output != 2 * ckpt.bounds.dim()) {
    throw DataError("actor output width does not match the delta bounds");
  }
  if (ckpt.window_w < 1 ||
      actor.params.shape.input != ckpt.window_w * ckpt.scaler.dim()) {
    throw DataError("actor input width does not match window and scaler");
  }
  return {actor.params, ckpt.scaler, ckpt.bounds, ckpt.window_w};
}

}  // namespace fwdlearn
