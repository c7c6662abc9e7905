#include "roadqa/errors.hpp"

namespace roadqa {

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : ValidationError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace roadqa
