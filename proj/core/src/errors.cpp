#include "fusion/errors.hpp"

#include <sstream>

namespace fusion {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::validation: return "validation";
        case ErrorCode::conflict: return "conflict";
        case ErrorCode::integrity: return "integrity";
        case ErrorCode::internal: return "internal";
    }
    return "internal";
}

ParseError::ParseError(std::string file, std::size_t line, const std::string& what)
    : ValidationError(file + ":" + std::to_string(line) + ": " + what),
      file_(std::move(file)),
      line_(line) {}

ModelFormatError::ModelFormatError(std::string field_path, const std::string& what)
    : ValidationError(field_path + ": " + what), field_path_(std::move(field_path)) {}

ReplayDivergenceError::ReplayDivergenceError(std::size_t step, const std::string& what)
    : Error("replay diverged at step " + std::to_string(step) + ": " + what), step_(step) {}

namespace {
std::string gap_message(const std::vector<int>& steps) {
    std::ostringstream out;
    out << "report has manual steps that cannot be replayed:";
    for (int s : steps) out << ' ' << s;
    return out.str();
}
}  // namespace

GapError::GapError(std::vector<int> manual_steps)
    : ValidationError(gap_message(manual_steps)), manual_steps_(std::move(manual_steps)) {}

}  // namespace fusion
