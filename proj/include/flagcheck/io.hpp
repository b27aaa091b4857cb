#pragma once

#include <iosfwd>
#include <string>

#include "flagcheck/channel.hpp"
#include "flagcheck/state.hpp"

namespace flagcheck {

// QSTATE v1: header `qstate 1 dim=<d> dims=<d1,d2,...>`, then d rows of d
// whitespace-separated entries `<re><sign><im>j` at 17 significant digits.
void write_qstate(std::ostream& os, const DensityMatrix& rho);
std::string qstate_to_string(const DensityMatrix& rho);

// Readers reject files whose matrices violate the DensityMatrix invariants
// (Hermiticity, trace, positivity) beyond the standard tolerances.
DensityMatrix read_qstate(std::istream& is);
DensityMatrix qstate_from_string(const std::string& text);

// KRAUS v1: header `kraus 1 n=<count> in=<d> out=<d>`, then the operators as
// QSTATE-style matrix blocks separated by blank lines.
void write_kraus(std::ostream& os, const KrausChannel& ch);
std::string kraus_to_string(const KrausChannel& ch);
KrausChannel read_kraus(std::istream& is);
KrausChannel kraus_from_string(const std::string& text);

std::string format_complex(Complex z);
Complex parse_complex(const std::string& token);

// FNV-1a over the serialized form; stable fingerprint for check records.
std::string digest_hex(const std::string& payload);
std::string digest(const DensityMatrix& rho);

}  // namespace flagcheck
