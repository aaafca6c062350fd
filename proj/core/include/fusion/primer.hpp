#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fusion/action.hpp"
#include "fusion/xml.hpp"

namespace fusion {

/// Declarative stand-in for a decompiled app: a manifest plus layout and
/// menu resources.
///
/// On disk:
///   bundle.json   app_id, name, version, main_activity,
///                 activity_layouts {activity: ["layout/x.xml", "menu/y.xml"]},
///                 source_index {component_id: ["com.example.Foo"]}
///   layout/*.xml  elements named after their widget type
///   menu/*.xml    <menu><item id=... title=.../></menu>
struct AppBundle {
    std::string app_id;
    std::string name;
    std::string version;
    std::vector<xml::Document> layout_files;
    std::vector<xml::Document> menu_files;
    std::map<std::string, std::vector<std::string>> source_index;
    std::string main_activity;
    std::map<std::string, std::vector<std::string>> activity_layouts;
};

/// Static identity of a GUI widget.
struct ComponentDescriptor {
    std::string component_id;
    std::string component_type;
    ActionSet declared_actions;
    std::set<std::string> activities;
    std::set<std::string> source_classes;
    /// Set for widgets only seen at runtime, never in a layout or menu.
    bool dynamic = false;

    friend bool operator==(const ComponentDescriptor&, const ComponentDescriptor&) = default;
};

struct ComponentUniverse {
    std::string app_id;
    std::map<std::string, ComponentDescriptor> descriptors;
    std::set<std::string> type_set;
    /// Elements skipped because they carry no id.
    std::size_t anonymous_elements = 0;

    const ComponentDescriptor* find(const std::string& component_id) const;

    friend bool operator==(const ComponentUniverse&, const ComponentUniverse&) = default;
};

/// Reads and validates a bundle directory.
/// Throws BundleFormatError (missing/invalid manifest), ParseError
/// (malformed XML) or ValidationError (dangling or orphaned layout).
AppBundle parse_app_bundle(const std::filesystem::path& dir);

/// Builds the component universe. Throws ValidationError when one id is
/// declared with two different element types.
ComponentUniverse extract_components(const AppBundle& bundle);

}  // namespace fusion
