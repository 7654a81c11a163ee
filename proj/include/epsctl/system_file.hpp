#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "epsctl/sysmodel.hpp"

namespace epsctl {

// One of the four document kinds: "lti", "state_feedback", "filter",
// "output_feedback". Matrices are nested row-major arrays.
struct SystemFile {
    std::variant<LtiSystem, StateFeedbackPlant, FilterPlant, OutputFeedbackPlant> system;
    std::optional<double> alpha;

    [[nodiscard]] std::string_view kind() const;
};

// All failures are reported as Errc::ParseError naming the offending field.
SystemFile parse_system_file(std::string_view text);
SystemFile load_system_file(const std::string& path);

nlohmann::json to_json(const SystemFile& file);
nlohmann::json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& field);

std::string read_text_file(const std::string& path);

// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace epsctl
