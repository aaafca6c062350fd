#include "fusion/primer.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fusion/errors.hpp"

namespace fusion {

namespace fs = std::filesystem;
using nlohmann::json;

const ComponentDescriptor* ComponentUniverse::find(const std::string& component_id) const {
    auto it = descriptors.find(component_id);
    return it == descriptors.end() ? nullptr : &it->second;
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BundleFormatError("cannot read " + path.filename().string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string require_string(const json& manifest, const char* key) {
    auto it = manifest.find(key);
    if (it == manifest.end() || !it->is_string())
        throw BundleFormatError(std::string("bundle.json: field '") + key + "' must be a string");
    return it->get<std::string>();
}

std::map<std::string, std::vector<std::string>> require_string_lists(const json& manifest,
                                                                     const char* key,
                                                                     bool required) {
    std::map<std::string, std::vector<std::string>> out;
    auto it = manifest.find(key);
    if (it == manifest.end()) {
        if (required)
            throw BundleFormatError(std::string("bundle.json: missing field '") + key + "'");
        return out;
    }
    if (!it->is_object())
        throw BundleFormatError(std::string("bundle.json: field '") + key + "' must be an object");
    for (const auto& [name, list] : it->items()) {
        if (!list.is_array())
            throw BundleFormatError(std::string("bundle.json: ") + key + "." + name +
                                    " must be an array of strings");
        auto& values = out[name];
        for (const auto& v : list) {
            if (!v.is_string())
                throw BundleFormatError(std::string("bundle.json: ") + key + "." + name +
                                        " must be an array of strings");
            values.push_back(v.get<std::string>());
        }
    }
    return out;
}

std::vector<xml::Document> load_xml_dir(const fs::path& root, const std::string& subdir) {
    std::vector<xml::Document> docs;
    const fs::path dir = root / subdir;
    if (!fs::is_directory(dir)) return docs;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".xml") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files)
        docs.push_back(xml::parse(read_file(file), subdir + "/" + file.filename().string()));
    return docs;
}

// Widget types whose Android defaults imply an action without an explicit attribute.
const std::set<std::string, std::less<>> kClickableByDefault = {
    "Button", "ImageButton", "CheckBox", "RadioButton", "Switch", "ToggleButton", "Spinner",
    "MenuItem"};
const std::set<std::string, std::less<>> kEditableByDefault = {
    "EditText", "AutoCompleteTextView", "MultiAutoCompleteTextView"};
const std::set<std::string, std::less<>> kScrollableByDefault = {
    "ScrollView", "HorizontalScrollView", "NestedScrollView", "ListView",
    "GridView",   "RecyclerView",         "ViewPager"};

bool flag(const xml::Element& el, const std::string& path, std::string_view attr, bool fallback) {
    auto value = el.attribute(attr);
    if (!value) return fallback;
    if (*value == "true") return true;
    if (*value == "false") return false;
    throw ParseError(path, el.line,
                     "attribute '" + std::string(attr) + "' must be true or false, got '" + *value + "'");
}

std::string normalize_id(std::string id) {
    for (std::string_view prefix : {"@+id/", "@id/", "@android:id/"}) {
        if (id.rfind(prefix, 0) == 0) return id.substr(prefix.size());
    }
    return id;
}

struct Walker {
    const AppBundle& bundle;
    const std::set<std::string>& activities;
    const std::string& path;
    bool is_menu;
    ComponentUniverse& universe;

    void visit(const xml::Element& el) {
        // Menu containers group items but are not widgets themselves.
        const bool container = is_menu && (el.name == "menu" || el.name == "group");
        const std::string type = (is_menu && el.name == "item") ? "MenuItem" : el.name;
        if (!container) {
            if (auto raw_id = el.attribute("id"); raw_id && !raw_id->empty())
                add(el, type, normalize_id(*raw_id));
            else
                ++universe.anonymous_elements;
        }
        for (const auto& child : el.children) visit(child);
    }

    void add(const xml::Element& el, const std::string& type, const std::string& id) {
        ActionSet actions;
        if (flag(el, path, "clickable", kClickableByDefault.contains(type))) actions.insert(ActionKind::click);
        if (flag(el, path, "longClickable", false)) actions.insert(ActionKind::long_click);
        if (flag(el, path, "editable", kEditableByDefault.contains(type))) actions.insert(ActionKind::type);
        if (flag(el, path, "scrollable", kScrollableByDefault.contains(type))) actions.insert(ActionKind::swipe);

        auto [it, inserted] = universe.descriptors.try_emplace(id);
        ComponentDescriptor& desc = it->second;
        if (inserted) {
            desc.component_id = id;
            desc.component_type = type;
            if (auto src = bundle.source_index.find(id); src != bundle.source_index.end())
                desc.source_classes.insert(src->second.begin(), src->second.end());
        } else if (desc.component_type != type) {
            throw ValidationError("component '" + id + "' declared as both " + desc.component_type +
                                  " and " + type + " (" + path + ":" + std::to_string(el.line) + ")");
        }
        desc.declared_actions.insert(actions.begin(), actions.end());
        desc.activities.insert(activities.begin(), activities.end());
    }
};

}  // namespace

AppBundle parse_app_bundle(const fs::path& dir) {
    const fs::path manifest_path = dir / "bundle.json";
    if (!fs::is_regular_file(manifest_path)) throw BundleFormatError("missing bundle manifest bundle.json");
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::parse_error& e) {
        throw BundleFormatError(std::string("bundle.json is not valid JSON: ") + e.what());
    }
    if (!manifest.is_object()) throw BundleFormatError("bundle.json must contain an object");

    AppBundle bundle;
    bundle.app_id = require_string(manifest, "app_id");
    if (bundle.app_id.empty()) throw BundleFormatError("bundle.json: app_id must not be empty");
    bundle.name = require_string(manifest, "name");
    bundle.version = require_string(manifest, "version");
    bundle.main_activity = require_string(manifest, "main_activity");
    bundle.activity_layouts = require_string_lists(manifest, "activity_layouts", true);
    bundle.source_index = require_string_lists(manifest, "source_index", false);
    bundle.layout_files = load_xml_dir(dir, "layout");
    bundle.menu_files = load_xml_dir(dir, "menu");

    if (!bundle.activity_layouts.contains(bundle.main_activity))
        throw ValidationError("main_activity '" + bundle.main_activity + "' has no activity_layouts entry");

    std::set<std::string> present;
    for (const auto& d : bundle.layout_files) present.insert(d.path);
    for (const auto& d : bundle.menu_files) present.insert(d.path);
    std::set<std::string> referenced;
    for (const auto& [activity, files] : bundle.activity_layouts) {
        for (const auto& f : files) {
            if (!present.contains(f))
                throw ValidationError("activity '" + activity + "' references missing layout '" + f + "'");
            referenced.insert(f);
        }
    }
    for (const auto& f : present) {
        if (!referenced.contains(f))
            throw ValidationError("layout '" + f + "' is not attached to any activity");
    }
    return bundle;
}

ComponentUniverse extract_components(const AppBundle& bundle) {
    ComponentUniverse universe;
    universe.app_id = bundle.app_id;

    std::map<std::string, std::set<std::string>> owners;
    for (const auto& [activity, files] : bundle.activity_layouts)
        for (const auto& f : files) owners[f].insert(activity);

    auto walk = [&](const std::vector<xml::Document>& docs, bool is_menu) {
        for (const auto& doc : docs) {
            Walker walker{bundle, owners[doc.path], doc.path, is_menu, universe};
            walker.visit(doc.root);
        }
    };
    walk(bundle.layout_files, false);
    walk(bundle.menu_files, true);

    for (const auto& [id, desc] : universe.descriptors) universe.type_set.insert(desc.component_type);
    return universe;
}

}  // namespace fusion
