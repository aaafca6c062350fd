#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fusion::xml {

struct Element {
    std::string name;
    std::map<std::string, std::string> attributes;
    std::vector<Element> children;
    std::size_t line = 0;

    /// Looks up `name`, falling back to the "android:"-prefixed spelling.
    std::optional<std::string> attribute(std::string_view name) const;
};

struct Document {
    std::string path;  // relative to the bundle root
    Element root;
};

/// Parses a UTF-8 XML document. Throws ParseError naming `path` and the
/// offending line on malformed input.
Document parse(std::string_view text, std::string path);

}  // namespace fusion::xml
