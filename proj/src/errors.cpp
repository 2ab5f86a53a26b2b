#include "lut4d/errors.hpp"

namespace lut4d {

const char* to_string(ParseErrorKind kind) noexcept {
    switch (kind) {
        case ParseErrorKind::MissingSize: return "missing LUT_4D_SIZE";
        case ParseErrorKind::BadSize: return "bad LUT_4D_SIZE";
        case ParseErrorKind::BadDomain: return "unsupported domain";
        case ParseErrorKind::UnknownKeyword: return "unknown keyword";
        case ParseErrorKind::NonNumeric: return "non-numeric token";
        case ParseErrorKind::NonFinite: return "non-finite value";
        case ParseErrorKind::WrongFieldCount: return "wrong field count";
        case ParseErrorKind::WrongLineCount: return "wrong data line count";
    }
    return "parse error";
}

ParseError::ParseError(ParseErrorKind kind, std::size_t line, const std::string& detail)
    : Error("line " + std::to_string(line) + ": " + to_string(kind) +
            (detail.empty() ? "" : " (" + detail + ")")),
      kind_(kind),
      line_(line) {}

int exit_code(const std::exception& e) noexcept {
    if (dynamic_cast<const IoError*>(&e)) return 3;
    if (dynamic_cast<const ParseError*>(&e)) return 3;
    if (dynamic_cast<const ShapeError*>(&e)) return 4;
    if (dynamic_cast<const InvalidArgument*>(&e)) return 4;
    if (dynamic_cast<const IndexError*>(&e)) return 4;
    if (dynamic_cast<const NumericError*>(&e)) return 5;
    return 1;
}

}  // namespace lut4d
