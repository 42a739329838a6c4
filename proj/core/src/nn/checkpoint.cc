// Copyright 2026 The PIFM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pifm/nn/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "pifm/error.h"

namespace pifm::nn {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint codec assumes a little-endian host");

constexpr char kMagic[8] = {'P', 'I', 'F', 'M', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  template <typename T>
  void Put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void PutString(const std::string& s) {
    Put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void PutDoubles(const std::vector<double>& v) {
    out_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }
  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  template <typename T>
  T Get() {
    Need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string GetString() {
    auto n = Get<std::uint32_t>();
    Need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<double> GetDoubles(std::size_t count) {
    Need(count * sizeof(double));
    std::vector<double> v(count);
    std::memcpy(v.data(), in_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
    return v;
  }
  bool AtEnd() const { return pos_ == in_.size(); }

 private:
  void Need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw ParseError("checkpoint", 0, "truncated data");
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string EncodeCheckpoint(const Checkpoint& ckpt) {
  Writer w;
  for (char c : kMagic) w.Put(c);
  w.Put<std::uint32_t>(kCheckpointVersion);
  w.PutString(ckpt.tag);
  w.PutString(ckpt.metadata);
  const ParameterSet& p = ckpt.params;
  w.Put<std::uint64_t>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    w.PutString(p.name(i));
    w.Put<std::uint32_t>(static_cast<std::uint32_t>(p.at(i).shape.size()));
    for (std::size_t d : p.at(i).shape) w.Put<std::uint64_t>(d);
    w.PutDoubles(p.at(i).data);
  }
  w.Put<std::uint8_t>(ckpt.optimizer ? 1 : 0);
  if (ckpt.optimizer) {
    const AdamState& s = *ckpt.optimizer;
    if (s.m.size() != p.size() || s.v.size() != p.size()) {
      throw StateError("EncodeCheckpoint: optimizer state does not match parameters");
    }
    w.Put<std::uint64_t>(s.step);
    w.Put(s.lr);
    w.Put(s.beta1);
    w.Put(s.beta2);
    w.Put(s.eps);
    for (std::size_t i = 0; i < p.size(); ++i) {
      w.PutDoubles(s.m[i]);
      w.PutDoubles(s.v[i]);
    }
  }
  return w.Take();
}

Checkpoint DecodeCheckpoint(const std::string& bytes) {
  Reader r(bytes);
  for (char c : kMagic) {
    if (r.Get<char>() != c) throw ParseError("checkpoint", 0, "bad magic");
  }
  const auto version = r.Get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint", 0, "unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.tag = r.GetString();
  ckpt.metadata = r.GetString();
  const auto count = r.Get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.GetString();
    const auto ndim = r.Get<std::uint32_t>();
    std::vector<std::size_t> shape(ndim);
    std::size_t len = 1;
    for (auto& d : shape) {
      d = r.Get<std::uint64_t>();
      len *= d;
    }
    Tensor& t = ckpt.params.Add(std::move(name), 0, 0);
    t.shape = std::move(shape);
    t.data = r.GetDoubles(len);
  }
  if (r.Get<std::uint8_t>()) {
    AdamState s;
    s.step = r.Get<std::uint64_t>();
    s.lr = r.Get<double>();
    s.beta1 = r.Get<double>();
    s.beta2 = r.Get<double>();
    s.eps = r.Get<double>();
    for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
      s.m.push_back(r.GetDoubles(ckpt.params.at(i).data.size()));
      s.v.push_back(r.GetDoubles(ckpt.params.at(i).data.size()));
    }
    ckpt.optimizer = std::move(s);
  }
  if (!r.AtEnd()) throw ParseError("checkpoint", 0, "trailing bytes");
  return ckpt;
}

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  const std::string bytes = EncodeCheckpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return DecodeCheckpoint(bytes);
}

}  // namespace pifm::nn
