#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "lloss/models.hpp"

namespace lloss {

namespace {

constexpr char kMagic[4] = {'L', 'R', 'N', 'K'};
constexpr std::uint32_t kMaxRank = 8;

template <typename U>
void put_le(std::ostream& out, U v) {
  unsigned char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), sizeof(U));
}

template <typename U>
U get_le(std::istream& in) {
  unsigned char buf[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(U))) throw FormatError("checkpoint truncated");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, std::span<const Tensor> tensors) {
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, tensors.size());
  for (const Tensor& t : tensors) {
    const Shape& shape = t.shape();
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (auto e : shape) put_le<std::uint64_t>(out, e);
    for (Real v : t.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(static_cast<double>(v)));
  }
  if (!out) throw FormatError("failed writing checkpoint");
}

void write_checkpoint(std::ostream& out, std::span<const ParamBlock* const> params) {
  std::vector<Tensor> tensors;
  tensors.reserve(params.size());
  for (const ParamBlock* p : params) tensors.push_back(p->value);
  write_checkpoint(out, std::span<const Tensor>(tensors));
}

std::vector<Tensor> read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("checkpoint magic mismatch");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  const auto count = get_le<std::uint64_t>(in);
  std::vector<Tensor> tensors;
  for (std::uint64_t t = 0; t < count; ++t) {
    const auto rank = get_le<std::uint32_t>(in);
    if (rank == 0 || rank > kMaxRank) throw FormatError("checkpoint tensor rank " + std::to_string(rank));
    Shape shape(rank);
    for (auto& e : shape) e = static_cast<std::size_t>(get_le<std::uint64_t>(in));
    std::vector<Real> data(shape_product(shape));
    for (auto& v : data) v = static_cast<Real>(std::bit_cast<double>(get_le<std::uint64_t>(in)));
    tensors.emplace_back(std::move(shape), std::move(data));
  }
  return tensors;
}

void assign_checkpoint(std::span<ParamBlock* const> params, const std::vector<Tensor>& tensors) {
  if (params.size() != tensors.size()) {
    throw FormatError("checkpoint holds " + std::to_string(tensors.size()) + " tensors, model has " +
                      std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->value.shape() != tensors[i].shape()) {
      throw FormatError("checkpoint tensor " + std::to_string(i) + " has shape " + shape_str(tensors[i].shape()) +
                        ", model expects " + shape_str(params[i]->value.shape()));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->value = tensors[i];
    params[i]->zero_grad();
    params[i]->reset_velocity();
  }
}

void save_checkpoint(const std::filesystem::path& path, const TargetModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  const auto params = model.parameters();
  write_checkpoint(out, params);
}

void load_checkpoint(const std::filesystem::path& path, TargetModel& model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  const auto params = model.parameters();
  assign_checkpoint(params, read_checkpoint(in));
}

}  // namespace lloss
