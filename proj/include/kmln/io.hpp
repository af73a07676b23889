#pragma once

// JSON documents for matrices and parameter sets, and the text form of
// classification and verification reports.
//
// Complex numbers are [re, im] pairs; matrices are row-major 4x4 arrays.

#include "kmln/classifier.hpp"
#include "kmln/families.hpp"
#include "kmln/harness.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kmln {

struct DocumentMeta {
    std::string tag;  // family ("K-5") or variant ("03") name
    FamilyConstants constants;
    std::optional<std::uint64_t> seed;
    std::optional<bool> real_mode;
};

struct MatrixDocument {
    std::optional<Mat4d> matrix;
    std::optional<ParamSetd> params;
    std::optional<DocumentMeta> meta;

    /// params if present, otherwise the disassembled matrix.
    ParamSetd parameters() const;

    /// matrix if present, otherwise the assembled params.
    Mat4d matrix_value() const;
};

/// Parses and validates a document. Throws Error(Parse) with a message that
/// names the offending position (byte offset or JSON pointer).
MatrixDocument parse_document(std::string_view text);

/// Pretty-printed JSON, keys in the order params, matrix, meta.
std::string serialize_document(const MatrixDocument& doc);

std::string serialize_report(const ClassReport& report);

/// One JSON object per finding, then a summary line.
std::string serialize_findings(const FindingsReport& report);

/// "2" or "2,-0.5" (real, imaginary).
std::optional<Complexd> parse_complex(std::string_view text);

} // namespace kmln
