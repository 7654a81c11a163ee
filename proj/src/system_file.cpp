#include "epsctl/system_file.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "epsctl/error.hpp"

namespace epsctl {

using nlohmann::json;

namespace {

Matrix required(const json& doc, const char* field) {
    if (!doc.contains(field)) {
        throw Error(Errc::ParseError, std::string("missing required field '") + field + "'");
    }
    return matrix_from_json(doc.at(field), field);
}

template<typename T>
T checked(T value) {
    try {
        value.validate();
    } catch (const Error& e) {
        throw Error(Errc::ParseError, e.what());
    }
    return value;
}

}  // namespace

std::string_view SystemFile::kind() const {
    switch (system.index()) {
    case 0: return "lti";
    case 1: return "state_feedback";
    case 2: return "filter";
    default: return "output_feedback";
    }
}

Matrix matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) {
        throw Error(Errc::ParseError, "field '" + field + "' must be a nonempty array of rows");
    }
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty()) {
        throw Error(Errc::ParseError, "field '" + field + "' must be a nonempty array of rows");
    }
    const std::size_t cols = j[0].size();
    Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const json& row = j[r];
        if (!row.is_array() || row.size() != cols) {
            throw Error(Errc::ParseError, "field '" + field + "' is not rectangular");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!row[c].is_number()) {
                throw Error(Errc::ParseError, "field '" + field + "' has a non-numeric entry");
            }
            const double v = row[c].get<double>();
            if (!std::isfinite(v)) {
                throw Error(Errc::ParseError, "field '" + field + "' has a non-finite entry");
            }
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    return M;
}

json matrix_to_json(const Matrix& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            row.push_back(M(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

SystemFile parse_system_file(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw Error(Errc::ParseError, "system file must be a JSON object");
    }
    if (!doc.contains("kind") || !doc["kind"].is_string()) {
        throw Error(Errc::ParseError, "missing required field 'kind'");
    }

    SystemFile file;
    const std::string kind = doc["kind"].get<std::string>();
    if (kind == "lti") {
        LtiSystem s{required(doc, "A"), required(doc, "B"), required(doc, "C"), Matrix()};
        if (doc.contains("D")) {
            s.D = matrix_from_json(doc["D"], "D");
        }
        file.system = checked(std::move(s));
    } else if (kind == "state_feedback") {
        file.system = checked(StateFeedbackPlant{required(doc, "A"), required(doc, "B"), required(doc, "Bw"),
                                                 required(doc, "C"), required(doc, "D")});
    } else if (kind == "filter") {
        file.system = checked(FilterPlant{required(doc, "A"), required(doc, "B"), required(doc, "C"),
                                          required(doc, "D"), required(doc, "Cz")});
    } else if (kind == "output_feedback") {
        file.system = checked(OutputFeedbackPlant{required(doc, "A"), required(doc, "B1"), required(doc, "B2"),
                                                  required(doc, "C1"), required(doc, "D1"), required(doc, "C2"),
                                                  required(doc, "D2")});
    } else {
        throw Error(Errc::ParseError, "unknown kind '" + kind + "'");
    }

    if (doc.contains("alpha")) {
        const json& a = doc["alpha"];
        if (!a.is_number() || !std::isfinite(a.get<double>())) {
            throw Error(Errc::ParseError, "field 'alpha' must be a finite number");
        }
        file.alpha = a.get<double>();
    }
    return file;
}

SystemFile load_system_file(const std::string& path) {
    return parse_system_file(read_text_file(path));
}

json to_json(const SystemFile& file) {
    json doc;
    doc["kind"] = file.kind();
    std::visit(
        [&doc](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LtiSystem>) {
                doc["A"] = matrix_to_json(s.A);
                doc["B"] = matrix_to_json(s.B);
                doc["C"] = matrix_to_json(s.C);
                if (s.D.size() != 0) {
                    doc["D"] = matrix_to_json(s.D);
                }
            } else if constexpr (std::is_same_v<T, StateFeedbackPlant>) {
                doc["A"] = matrix_to_json(s.A);
                doc["B"] = matrix_to_json(s.B);
                doc["Bw"] = matrix_to_json(s.Bw);
                doc["C"] = matrix_to_json(s.C);
                doc["D"] = matrix_to_json(s.D);
            } else if constexpr (std::is_same_v<T, FilterPlant>) {
                doc["A"] = matrix_to_json(s.A);
                doc["B"] = matrix_to_json(s.B);
                doc["C"] = matrix_to_json(s.C);
                doc["D"] = matrix_to_json(s.D);
                doc["Cz"] = matrix_to_json(s.Cz);
            } else {
                doc["A"] = matrix_to_json(s.A);
                doc["B1"] = matrix_to_json(s.B1);
                doc["B2"] = matrix_to_json(s.B2);
                doc["C1"] = matrix_to_json(s.C1);
                doc["D1"] = matrix_to_json(s.D1);
                doc["C2"] = matrix_to_json(s.C2);
                doc["D2"] = matrix_to_json(s.D2);
            }
        },
        file.system);
    if (file.alpha) {
        doc["alpha"] = *file.alpha;
    }
    return doc;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::ParseError, "cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(Errc::BadSpec, "cannot write '" + tmp + "'");
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) {
            throw Error(Errc::BadSpec, "write to '" + tmp + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(Errc::BadSpec, "cannot replace '" + path + "'");
    }
}

}  // namespace epsctl
