#pragma once

#include <map>
#include <string>
#include <string_view>

namespace vpr {

// The six agent prompt templates. Defaults are compiled in from
// templates/*.txt; load_dir() reads the same six files from disk instead.
struct TemplateSet {
    std::string router;
    std::string policy;
    std::string refiner;
    std::string atomizer;
    std::string validator;
    std::string reviser;

    static TemplateSet builtin();
    static TemplateSet load_dir(const std::string& dir);  // throws ConfigError
};

// Python-format-style substitution: "{key}" is replaced for keys present in
// values, "{{" and "}}" unescape to literal braces, and any other braced span
// (for example inline JSON examples) passes through untouched.
std::string fill_template(std::string_view tpl,
                          const std::map<std::string, std::string>& values);

}  // namespace vpr
