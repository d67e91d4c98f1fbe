#include "morphgate/checkpoint.hpp"

#include "text_util.hpp"

#include <fmt/format.h>

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace morphgate::network {
namespace {

constexpr std::string_view kMagic = "morphgate-checkpoint";
constexpr int kVersion = 2;

class LineReader {
public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> fields(std::string_view key) {
    std::string line;
    if (!std::getline(in_, line)) throw DataError(fmt::format("truncated checkpoint, expected '{}'", key), line_ + 1);
    ++line_;
    std::istringstream ss(line);
    std::vector<std::string> out;
    for (std::string tok; ss >> tok;) out.push_back(tok);
    if (out.empty() || out.front() != key) throw DataError(fmt::format("expected '{}'", key), line_);
    out.erase(out.begin());
    return out;
  }

  double real() {
    std::string line;
    if (!std::getline(in_, line)) throw DataError("truncated parameter block", line_ + 1);
    ++line_;
    const auto v = detail::parse_real(line);
    if (!v) throw DataError(fmt::format("invalid parameter value '{}'", line), line_);
    return *v;
  }

  std::size_t line() const { return line_; }

private:
  std::istream& in_;
  std::size_t line_ = 0;
};

template <typename T>
T parse_or_throw(const std::string& text, std::size_t line) {
  if constexpr (std::is_floating_point_v<T>) {
    if (auto v = detail::parse_real(text)) return *v;
  } else {
    if (auto v = detail::parse_int<T>(text)) return *v;
  }
  throw DataError(fmt::format("invalid value '{}'", text), line);
}

}  // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  validate(checkpoint.params);
  out << kMagic << ' ' << kVersion << '\n' << "layer_dims";
  for (int d : checkpoint.params.layer_dims) out << ' ' << d;
  out << '\n'
      << "margin " << fmt::format("{}", checkpoint.margin) << '\n'
      << "seed " << checkpoint.seed << '\n'
      << "parameters " << checkpoint.params.parameter_count() << '\n';
  for (const auto* v : {&checkpoint.params.input_shift, &checkpoint.params.input_scale})
    for (Eigen::Index i = 0; i < v->size(); ++i) out << fmt::format("{}\n", (*v)(i));
  for (const auto& layer : checkpoint.params.layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) out << fmt::format("{}\n", layer.weight(r, c));
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out << fmt::format("{}\n", layer.bias(r));
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  save_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(std::istream& in) {
  LineReader reader(in);
  const auto magic = reader.fields(std::string(kMagic));
  if (magic.size() != 1 || magic[0] != std::to_string(kVersion))
    throw DataError("unsupported checkpoint version", reader.line());

  Checkpoint cp;
  for (const auto& d : reader.fields("layer_dims")) cp.params.layer_dims.push_back(parse_or_throw<int>(d, reader.line()));
  if (cp.params.layer_dims.size() < 2) throw DataError("layer_dims needs at least two entries", reader.line());
  for (int d : cp.params.layer_dims)
    if (d < 1) throw DataError("layer sizes must be positive", reader.line());

  auto single = [&](std::string_view key) {
    auto f = reader.fields(std::string(key));
    if (f.size() != 1) throw DataError(fmt::format("'{}' takes one value", key), reader.line());
    return f[0];
  };
  cp.margin = parse_or_throw<double>(single("margin"), reader.line());
  cp.seed = parse_or_throw<std::uint64_t>(single("seed"), reader.line());
  const auto count = parse_or_throw<std::size_t>(single("parameters"), reader.line());

  std::size_t expected = 0;
  for (std::size_t l = 0; l + 1 < cp.params.layer_dims.size(); ++l) {
    const int in_dim = cp.params.layer_dims[l];
    const int out_dim = cp.params.layer_dims[l + 1];
    expected += static_cast<std::size_t>(in_dim + 1) * static_cast<std::size_t>(out_dim);
  }
  if (count != expected)
    throw DataError(fmt::format("parameter count {} does not match layer_dims ({})", count, expected), reader.line());

  const int input_dim = cp.params.layer_dims.front();
  cp.params.input_shift.resize(input_dim);
  cp.params.input_scale.resize(input_dim);
  for (int i = 0; i < input_dim; ++i) cp.params.input_shift(i) = reader.real();
  for (int i = 0; i < input_dim; ++i) cp.params.input_scale(i) = reader.real();

  for (std::size_t l = 0; l + 1 < cp.params.layer_dims.size(); ++l) {
    const int in_dim = cp.params.layer_dims[l];
    const int out_dim = cp.params.layer_dims[l + 1];
    Layer layer{Matrix(out_dim, in_dim), Vector(out_dim)};
    for (int r = 0; r < out_dim; ++r)
      for (int c = 0; c < in_dim; ++c) layer.weight(r, c) = reader.real();
    for (int r = 0; r < out_dim; ++r) layer.bias(r) = reader.real();
    cp.params.layers.push_back(std::move(layer));
  }
  try {
    validate(cp.params);
  } catch (const std::exception& e) {
    throw DataError(e.what(), reader.line());
  }
  return cp;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

}  // namespace morphgate::network
