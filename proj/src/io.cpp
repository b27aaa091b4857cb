#include "flagcheck/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "flagcheck/errors.hpp"

namespace flagcheck {

std::string format_complex(Complex z) {
  char buf[64];
  const double re = z.real();
  const double im = z.imag();
  const char sign = std::signbit(im) ? '-' : '+';
  std::snprintf(buf, sizeof(buf), "%.16e%c%.16ej", re, sign, std::abs(im));
  return buf;
}

Complex parse_complex(const std::string& token) {
  if (token.empty() || token.back() != 'j') {
    throw IoError("complex entry must end with 'j': " + token);
  }
  // The separating sign is the last '+'/'-' not directly after an exponent
  // marker and not at position 0.
  std::size_t split = std::string::npos;
  for (std::size_t i = token.size() - 1; i > 0; --i) {
    const char c = token[i];
    if ((c == '+' || c == '-') && token[i - 1] != 'e' && token[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string::npos) throw IoError("cannot split complex entry: " + token);
  try {
    std::size_t used = 0;
    const double re = std::stod(token.substr(0, split), &used);
    if (used != split) throw IoError("trailing characters in real part: " + token);
    const std::string imag_text = token.substr(split, token.size() - split - 1);
    const double im = std::stod(imag_text, &used);
    if (used != imag_text.size()) throw IoError("trailing characters in imaginary part: " + token);
    return {re, im};
  } catch (const std::invalid_argument&) {
    throw IoError("malformed complex entry: " + token);
  } catch (const std::out_of_range&) {
    throw IoError("complex entry out of range: " + token);
  }
}

namespace {

void write_matrix_block(std::ostream& os, const ComplexMatrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ' ';
      os << format_complex(m(i, j));
    }
    os << '\n';
  }
}

ComplexMatrix read_matrix_block(std::istream& is, Index rows, Index cols) {
  ComplexMatrix m(rows, cols);
  std::string line;
  for (Index i = 0; i < rows; ++i) {
    if (!std::getline(is, line)) throw IoError("unexpected end of matrix block");
    std::istringstream row(line);
    std::string token;
    for (Index j = 0; j < cols; ++j) {
      if (!(row >> token)) throw IoError("matrix row has too few entries");
      m(i, j) = parse_complex(token);
    }
    std::string extra;
    if (row >> extra) throw IoError("matrix row has too many entries");
  }
  return m;
}

std::string expect_field(std::istringstream& header, const std::string& key) {
  std::string token;
  if (!(header >> token) || token.rfind(key + "=", 0) != 0) {
    throw IoError("expected field " + key + "=...");
  }
  return token.substr(key.size() + 1);
}

std::vector<Index> parse_dims_list(const std::string& text) {
  std::vector<Index> dims;
  std::istringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      dims.push_back(static_cast<Index>(std::stol(part)));
    } catch (const std::exception&) {
      throw IoError("malformed dims list: " + text);
    }
  }
  if (dims.empty()) throw IoError("empty dims list");
  return dims;
}

}  // namespace

void write_qstate(std::ostream& os, const DensityMatrix& rho) {
  os << "qstate 1 dim=" << rho.dim() << " dims=";
  for (std::size_t i = 0; i < rho.dims().size(); ++i) {
    if (i > 0) os << ',';
    os << rho.dims()[i];
  }
  os << '\n';
  write_matrix_block(os, rho.matrix());
}

std::string qstate_to_string(const DensityMatrix& rho) {
  std::ostringstream ss;
  write_qstate(ss, rho);
  return ss.str();
}

DensityMatrix read_qstate(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("missing qstate header");
  std::istringstream header(line);
  std::string magic, version;
  header >> magic >> version;
  if (magic != "qstate" || version != "1") throw IoError("not a QSTATE v1 header: " + line);
  Index d = 0;
  try {
    d = static_cast<Index>(std::stol(expect_field(header, "dim")));
  } catch (const IoError&) {
    throw;
  } catch (const std::exception&) {
    throw IoError("malformed dim field");
  }
  if (d < 1 || d > dimension_cap()) throw IoError("qstate dimension out of range");
  const std::vector<Index> dims = parse_dims_list(expect_field(header, "dims"));

  ComplexMatrix m = read_matrix_block(is, d, d);
  try {
    DensityMatrix rho(std::move(m), dims);
    rho.require_psd();
    return rho;
  } catch (const ArgumentError& e) {
    throw IoError(std::string("qstate violates state invariants: ") + e.what());
  }
}

DensityMatrix qstate_from_string(const std::string& text) {
  std::istringstream ss(text);
  return read_qstate(ss);
}

void write_kraus(std::ostream& os, const KrausChannel& ch) {
  os << "kraus 1 n=" << ch.size() << " in=" << ch.in_dim() << " out=" << ch.out_dim() << '\n';
  for (std::size_t n = 0; n < ch.size(); ++n) {
    if (n > 0) os << '\n';
    write_matrix_block(os, ch.kraus_ops()[n]);
  }
}

std::string kraus_to_string(const KrausChannel& ch) {
  std::ostringstream ss;
  write_kraus(ss, ch);
  return ss.str();
}

KrausChannel read_kraus(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("missing kraus header");
  std::istringstream header(line);
  std::string magic, version;
  header >> magic >> version;
  if (magic != "kraus" || version != "1") throw IoError("not a KRAUS v1 header: " + line);
  std::size_t count = 0;
  Index in = 0, out = 0;
  try {
    count = static_cast<std::size_t>(std::stoul(expect_field(header, "n")));
    in = static_cast<Index>(std::stol(expect_field(header, "in")));
    out = static_cast<Index>(std::stol(expect_field(header, "out")));
  } catch (const IoError&) {
    throw;
  } catch (const std::exception&) {
    throw IoError("malformed kraus header fields");
  }
  if (count < 1) throw IoError("kraus channel needs n >= 1");
  if (in < 1 || out < 1 || in > dimension_cap() || out > dimension_cap()) {
    throw IoError("kraus dimensions out of range");
  }

  std::vector<ComplexMatrix> ops;
  for (std::size_t n = 0; n < count; ++n) {
    if (n > 0) {
      if (!std::getline(is, line) || !line.empty()) {
        throw IoError("expected blank line between kraus operators");
      }
    }
    ops.push_back(read_matrix_block(is, out, in));
  }
  try {
    return KrausChannel(std::move(ops), {in}, {out});
  } catch (const ArgumentError& e) {
    throw IoError(std::string("kraus violates channel invariants: ") + e.what());
  }
}

KrausChannel kraus_from_string(const std::string& text) {
  std::istringstream ss(text);
  return read_kraus(ss);
}

std::string digest_hex(const std::string& payload) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string digest(const DensityMatrix& rho) { return digest_hex(qstate_to_string(rho)); }

}  // namespace flagcheck
