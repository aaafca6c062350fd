#include "fusion/xml.hpp"

#include <expat.h>

#include <memory>

#include "fusion/errors.hpp"

namespace fusion::xml {

std::optional<std::string> Element::attribute(std::string_view key) const {
    if (auto it = attributes.find(std::string(key)); it != attributes.end()) return it->second;
    if (auto it = attributes.find("android:" + std::string(key)); it != attributes.end())
        return it->second;
    return std::nullopt;
}

namespace {

struct Builder {
    XML_Parser parser = nullptr;
    Element root;
    std::vector<Element*> open;
    bool has_root = false;
};

void on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
    auto* b = static_cast<Builder*>(user);
    Element el;
    el.name = name;
    el.line = XML_GetCurrentLineNumber(b->parser);
    for (int i = 0; attrs[i] != nullptr; i += 2) el.attributes.emplace(attrs[i], attrs[i + 1]);
    if (b->open.empty()) {
        b->root = std::move(el);
        b->has_root = true;
        b->open.push_back(&b->root);
    } else {
        auto& siblings = b->open.back()->children;
        siblings.push_back(std::move(el));
        b->open.push_back(&siblings.back());
    }
}

void on_end(void* user, const XML_Char*) {
    static_cast<Builder*>(user)->open.pop_back();
}

}  // namespace

Document parse(std::string_view text, std::string path) {
    std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"),
                                                                        &XML_ParserFree);
    if (!parser) throw Error("cannot allocate XML parser");
    Builder builder;
    builder.parser = parser.get();
    XML_SetUserData(parser.get(), &builder);
    XML_SetElementHandler(parser.get(), &on_start, &on_end);
    if (XML_Parse(parser.get(), text.data(), static_cast<int>(text.size()), XML_TRUE) ==
        XML_STATUS_ERROR) {
        throw ParseError(path, XML_GetCurrentLineNumber(parser.get()),
                         XML_ErrorString(XML_GetErrorCode(parser.get())));
    }
    if (!builder.has_root) throw ParseError(path, 1, "document has no root element");
    return Document{std::move(path), std::move(builder.root)};
}

}  // namespace fusion::xml
