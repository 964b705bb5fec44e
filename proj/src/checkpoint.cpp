// SPDX-License-Identifier: Apache-2.0

#include "vdib/checkpoint.hpp"

#include <cstdlib>
#include <fstream>
#include <ios>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "vdib/errors.hpp"

namespace vdib {

namespace {

void put_block(std::ostream& out, const char* name, std::size_t rows, std::size_t cols,
               const std::vector<double>& values) {
  out << "block " << name << ' ' << rows << ' ' << cols << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out << ' ';
      out << values[r * cols + c];
    }
    out << '\n';
  }
}

constexpr std::size_t kAnyWidth = 0;

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string next_line() {
    std::string text;
    while (std::getline(in_, text)) {
      ++line_;
      if (!text.empty() && text.back() == '\r') text.pop_back();
      if (!text.empty()) return text;
    }
    throw ParseError(line_ + 1, "unexpected end of checkpoint");
  }

  std::size_t line() const { return line_; }

  std::vector<double> block(const std::string& name, std::size_t rows, std::size_t cols) {
    std::istringstream head(next_line());
    std::string word, got;
    std::size_t r = 0, c = 0;
    if (!(head >> word >> got >> r >> c) || word != "block") {
      throw ParseError(line_, "expected 'block " + name + " <rows> <cols>'");
    }
    if (got != name) throw ParseError(line_, "expected block " + name + ", found " + got);
    if (cols == kAnyWidth && c > 0) cols = c;
    if (r != rows || c != cols) {
      throw ValidationError("checkpoint block " + name + " is " + std::to_string(r) + "x" + std::to_string(c) +
                            ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    std::vector<double> values;
    values.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
      const std::string text = next_line();
      const char* p = text.c_str();
      for (std::size_t j = 0; j < cols; ++j) {
        char* end = nullptr;
        const double v = std::strtod(p, &end);
        if (end == p) throw ParseError(line_, "block " + name + ": expected " + std::to_string(cols) + " values");
        values.push_back(v);
        p = end;
      }
      while (*p == ' ' || *p == '\t') ++p;
      if (*p != '\0') throw ParseError(line_, "block " + name + ": trailing data");
    }
    return values;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::size_t meta_field(std::istringstream& ss, const std::string& key, std::size_t line) {
  std::string token;
  ss >> token;
  const std::string prefix = key + "=";
  if (token.rfind(prefix, 0) != 0) throw ParseError(line, "expected " + prefix + "<int>");
  try {
    std::size_t used = 0;
    const auto v = std::stoull(token.substr(prefix.size()), &used);
    if (used != token.size() - prefix.size()) throw std::invalid_argument(token);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError(line, "bad integer in '" + token + "'");
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const Model& model) {
  const EncoderParams& e = model.encoder;
  const DecoderParams& d = model.decoder;
  const auto flags = out.flags();
  out << "vdib-checkpoint " << kCheckpointVersion << '\n';
  out << "meta k=" << e.k << " n_in=" << e.n_in << " hidden=" << d.hidden << " classes=" << d.classes
      << " in_dim=" << d.in_dim << " output=" << to_string(d.output) << '\n';
  out << std::hexfloat;
  put_block(out, "encoder.kernel_a", 1, e.kernel_a.window(), e.kernel_a.coefficients);
  put_block(out, "encoder.kernel_b", 1, e.kernel_b.window(), e.kernel_b.coefficients);
  put_block(out, "encoder.w_ff", e.k, e.n_in, e.w_ff);
  put_block(out, "encoder.w_fb", 1, e.k, e.w_fb);
  put_block(out, "encoder.gamma", 1, e.k, e.gamma);
  put_block(out, "decoder.w1", d.hidden, d.in_dim, d.w1);
  put_block(out, "decoder.b1", 1, d.hidden, d.b1);
  put_block(out, "decoder.w2", d.classes, d.hidden, d.w2);
  put_block(out, "decoder.b2", 1, d.classes, d.b2);
  out.flags(flags);
}

Model read_checkpoint(std::istream& in) {
  Reader reader(in);
  {
    std::istringstream ss(reader.next_line());
    std::string tag;
    int version = 0;
    if (!(ss >> tag >> version) || tag != "vdib-checkpoint") {
      throw ParseError(reader.line(), "not a vdib checkpoint");
    }
    if (version != kCheckpointVersion) {
      throw ParseError(reader.line(), "unsupported checkpoint version " + std::to_string(version));
    }
  }
  Model m;
  EncoderParams& e = m.encoder;
  DecoderParams& d = m.decoder;
  {
    std::istringstream ss(reader.next_line());
    std::string word, output;
    ss >> word;
    if (word != "meta") throw ParseError(reader.line(), "expected meta line");
    e.k = meta_field(ss, "k", reader.line());
    e.n_in = meta_field(ss, "n_in", reader.line());
    d.hidden = meta_field(ss, "hidden", reader.line());
    d.classes = meta_field(ss, "classes", reader.line());
    d.in_dim = meta_field(ss, "in_dim", reader.line());
    ss >> output;
    if (output.rfind("output=", 0) != 0) throw ParseError(reader.line(), "expected output=<activation>");
    try {
      d.output = parse_output_activation(output.substr(7));
    } catch (const ConfigError& err) {
      throw ParseError(reader.line(), err.what());
    }
  }
  // Kernel windows are not in the meta line; the block header carries them.
  e.kernel_a.coefficients = reader.block("encoder.kernel_a", 1, kAnyWidth);
  e.kernel_b.coefficients = reader.block("encoder.kernel_b", 1, kAnyWidth);
  e.w_ff = reader.block("encoder.w_ff", e.k, e.n_in);
  e.w_fb = reader.block("encoder.w_fb", 1, e.k);
  e.gamma = reader.block("encoder.gamma", 1, e.k);
  d.w1 = reader.block("decoder.w1", d.hidden, d.in_dim);
  d.b1 = reader.block("decoder.b1", 1, d.hidden);
  d.w2 = reader.block("decoder.w2", d.classes, d.hidden);
  d.b2 = reader.block("decoder.b2", 1, d.classes);
  try {
    e.kernel_a.validate();
    e.kernel_b.validate();
    e.validate();
    d.validate();
  } catch (const std::exception& err) {
    throw ValidationError(std::string("checkpoint: ") + err.what());
  }
  if (d.in_dim % e.k != 0) throw ValidationError("checkpoint: decoder input is not a multiple of k");
  return m;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  write_checkpoint(out, model);
  if (!out) throw std::runtime_error("write failed for checkpoint " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace vdib
