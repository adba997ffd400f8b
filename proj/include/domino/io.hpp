/*
 * Copyright 2026 The domino-optics Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file io.hpp
 * @brief JSON serialization of states, element lists, reports and
 * certificates.
 *
 * Element list schema (either a bare array or {"dimension": n, "elements": [...]}):
 *
 *   {"type": "beamsplitter",  "modes": [i, j], "theta": t, "phi": p}
 *   {"type": "phase_shifter", "mode": k, "phase": p}
 *
 * Angles are in radians; phases outside [0, 2 pi) are wrapped on input.
 */
#pragma once

#include "domino/domino.hpp"
#include "domino/fock.hpp"
#include "domino/measure.hpp"
#include "domino/nogo.hpp"
#include "domino/optics.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace domino::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

/// Raised for malformed input documents; `line()` is 1-based, 0 when unknown.
class InputError : public std::runtime_error
{
public:
    InputError(const std::string& message, std::size_t line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message)
        , line_(line)
    {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// 1-based line of a byte offset in `text`.
inline std::size_t line_of_offset(const std::string& text, std::size_t offset)
{
    std::size_t line = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
        }
    }
    return line;
}

/// Line of the first occurrence of "key" in `text`, 0 if absent.
inline std::size_t line_of_key(const std::string& text, const std::string& key)
{
    const std::size_t pos = text.find('"' + key + '"');
    return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

/// Parses a JSON document, turning syntax errors into line-referenced InputErrors.
inline Json parse_document(const std::string& text)
{
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(std::string("malformed JSON: ") + e.what(), line_of_offset(text, e.byte));
    }
}

/// Rounds to `digits` significant decimal digits.
inline double round_significant(double value, int digits = 12)
{
    if (value == 0.0 || !std::isfinite(value)) {
        return value;
    }
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*e", digits - 1, value);
    return std::stod(buffer);
}

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw InputError("amplitude must be a [re, im] pair");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

// ---------------------------------------------------------------------------
// Polynomials and the state set

inline Json polynomial_to_json(const CreationPolynomial& p)
{
    Json terms = Json::array();
    for (const auto& t : p.terms()) {
        terms.push_back({{"exponents", t.monomial.exponents()}, {"amplitude", complex_json(t.amplitude)}});
    }
    return {{"mode_count", p.mode_count()}, {"terms", std::move(terms)}};
}

inline CreationPolynomial polynomial_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("mode_count") || !j.contains("terms")) {
        throw InputError("polynomial needs 'mode_count' and 'terms'");
    }
    const auto modes = j.at("mode_count").get<std::size_t>();
    std::vector<RawTerm> raw;
    for (const auto& t : j.at("terms")) {
        auto e = t.at("exponents").get<std::vector<int>>();
        if (e.size() != modes) {
            throw InputError("term exponent vector length differs from mode_count");
        }
        raw.emplace_back(std::move(e), complex_from_json(t.at("amplitude")));
    }
    return poly_from_terms(raw, modes);
}

inline Json mode_names(std::size_t aux_modes = 0)
{
    Json names = Json::array({"a1", "a2", "a3", "b1", "b2", "b3"});
    for (std::size_t k = 1; k <= aux_modes; ++k) {
        names.push_back("c" + std::to_string(k));
    }
    return names;
}

inline Json domino_set_to_json(const DominoSet& set)
{
    Json states = Json::array();
    for (StateLabel label : StateLabel::all()) {
        Json monomials = Json::array();
        for (const auto& t : set.state(label).terms()) {
            monomials.push_back({{"exponents", t.monomial.exponents()}, {"amplitude", complex_json(t.amplitude)}});
        }
        states.push_back({{"label", label.name()}, {"index", label.index()}, {"monomials", std::move(monomials)}});
    }
    return {{"modes", mode_names()}, {"states", std::move(states)}};
}

inline Json matrix_to_json(const Eigen::MatrixXcd& m)
{
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(complex_json(m(r, c)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline StateLabel label_from_name(const std::string& name)
{
    for (StateLabel label : StateLabel::all()) {
        if (label.name() == name) {
            return label;
        }
    }
    throw InputError("unknown state label '" + name + "'");
}

inline Json permutation_to_json(const StatePermutation& perm)
{
    Json table = Json::object();
    for (StateLabel label : StateLabel::all()) {
        const auto& entry = perm[label.slot()];
        table[label.name()] = {{"image", entry.image.name()}, {"phase", complex_json(entry.phase)}};
    }
    return table;
}

// ---------------------------------------------------------------------------
// Element lists

struct ElementList
{
    std::optional<std::size_t> dimension;
    std::vector<OpticalElement> elements;
};

inline Json element_to_json(const OpticalElement& element)
{
    if (const auto* bs = std::get_if<Beamsplitter>(&element)) {
        return {{"type", "beamsplitter"}, {"modes", {bs->mode_i, bs->mode_j}}, {"theta", bs->theta}, {"phi", bs->phi}};
    }
    const auto& ps = std::get<PhaseShifter>(element);
    return {{"type", "phase_shifter"}, {"mode", ps.mode}, {"phase", ps.phase}};
}

inline Json elements_to_json(std::span<const OpticalElement> elements, std::size_t dimension)
{
    Json list = Json::array();
    for (const auto& e : elements) {
        list.push_back(element_to_json(e));
    }
    return {{"dimension", dimension}, {"elements", std::move(list)}};
}

inline OpticalElement element_from_json(const Json& j, std::size_t index)
{
    const std::string where = "element " + std::to_string(index) + ": ";
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
        throw InputError(where + "needs a string 'type'");
    }
    auto number = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number()) {
            throw InputError(where + "'" + key + "' must be a number");
        }
        return j.at(key).get<double>();
    };
    auto index_value = [&](const Json& v, const char* key) {
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw InputError(where + "'" + key + "' must hold non-negative integers");
        }
        return v.get<std::size_t>();
    };
    const std::string type = j.at("type").get<std::string>();
    if (type == "beamsplitter") {
        if (!j.contains("modes") || !j.at("modes").is_array() || j.at("modes").size() != 2) {
            throw InputError(where + "'modes' must be a pair of mode indices");
        }
        return Beamsplitter{index_value(j.at("modes")[0], "modes"), index_value(j.at("modes")[1], "modes"),
                            number("theta"), wrap_phase(number("phi"))};
    }
    if (type == "phase_shifter") {
        if (!j.contains("mode")) {
            throw InputError(where + "'mode' missing");
        }
        return PhaseShifter{index_value(j.at("mode"), "mode"), wrap_phase(number("phase"))};
    }
    throw InputError(where + "unknown type '" + type + "' (expected beamsplitter or phase_shifter)");
}

inline ElementList elements_from_json(const Json& j)
{
    ElementList out;
    const Json* list = &j;
    if (j.is_object()) {
        if (!j.contains("elements")) {
            throw InputError("element document needs an 'elements' array");
        }
        if (j.contains("dimension")) {
            if (!j.at("dimension").is_number_integer() || j.at("dimension").get<long long>() <= 0) {
                throw InputError("'dimension' must be a positive integer");
            }
            out.dimension = j.at("dimension").get<std::size_t>();
        }
        list = &j.at("elements");
    }
    if (!list->is_array()) {
        throw InputError("element list must be a JSON array");
    }
    for (std::size_t k = 0; k < list->size(); ++k) {
        out.elements.push_back(element_from_json((*list)[k], k));
    }
    return out;
}

/// Parses an element document, attaching line numbers to errors.
inline ElementList parse_elements(const std::string& text)
{
    const Json j = parse_document(text);
    try {
        return elements_from_json(j);
    } catch (const InputError& e) {
        // best effort: point at the offending element's "type" key
        const std::string msg = e.what();
        std::size_t line = 0;
        if (msg.rfind("element ", 0) == 0) {
            const std::size_t index = std::stoul(msg.substr(8));
            std::size_t pos = 0;
            for (std::size_t k = 0; k <= index && pos != std::string::npos; ++k) {
                pos = text.find("\"type\"", k == 0 ? 0 : pos + 1);
            }
            line = pos == std::string::npos ? 0 : line_of_offset(text, pos);
        }
        throw InputError(msg, line);
    }
}

// ---------------------------------------------------------------------------
// Reports

inline Json probabilities_by_label(const std::array<double, kStateCount>& p, bool rounded = true)
{
    Json out = Json::object();
    for (StateLabel label : StateLabel::all()) {
        out[label.name()] = rounded ? round_significant(p[label.slot()]) : p[label.slot()];
    }
    return out;
}

inline Json report_to_json(const DiscriminationReport& report)
{
    Json confusion = Json::object();
    for (const auto& row : report.confusion) {
        confusion[row.outcome] = {{"guess", row.guess.name()}, {"probabilities", probabilities_by_label(row.probabilities)}};
    }
    return {{"success_probability", round_significant(report.success_probability)},
            {"per_state_success", probabilities_by_label(report.per_state_success)},
            {"confusion", std::move(confusion)}};
}

inline Json distribution_to_json(const OutcomeDistribution& dist)
{
    Json out = Json::array();
    for (const auto& [occ, p] : dist) {
        out.push_back({{"occupation", occ}, {"probability", p}});
    }
    return out;
}

namespace detail {

inline Json node_to_json(const CascadeNode& node)
{
    if (const auto* leaf = std::get_if<GuessLeaf>(&node.body)) {
        return {{"kind", "guess"}, {"guess", leaf->guess ? Json(leaf->guess->name()) : Json(nullptr)}};
    }
    if (const auto* leaf = std::get_if<CountLeaf>(&node.body)) {
        Json guesses = Json::array();
        for (const auto& [occ, label] : leaf->guesses) {
            guesses.push_back({{"occupation", occ}, {"guess", label.name()}});
        }
        return {{"kind", "count"},
                {"unitary", elements_to_json(leaf->transform.elements(), leaf->transform.dimension())},
                {"guesses", std::move(guesses)}};
    }
    const auto& stage = std::get<DetectStage>(node.body);
    Json children = Json::object();
    for (const auto& [n, child] : stage.children) {
        children[std::to_string(n)] = node_to_json(*child);
    }
    Json out = {{"kind", "detect"},
                {"unitary", elements_to_json(stage.transform.elements(), stage.transform.dimension())},
                {"detected_mode", stage.detected_mode},
                {"children", std::move(children)}};
    if (stage.fallback) {
        out["fallback"] = node_to_json(*stage.fallback);
    }
    return out;
}

}  // namespace detail

inline Json strategy_to_json(const CascadeStrategy& strategy)
{
    return {{"input_modes", strategy.input_modes()}, {"depth", strategy.depth()},
            {"root", detail::node_to_json(strategy.root())}};
}

inline Json ns_to_json(const NsAnalysis& ns)
{
    Json degrees = Json::object();
    for (StateLabel label : StateLabel::all()) {
        degrees[label.name()] = ns.per_state_degrees[label.slot()];
    }
    return {{"n_s", ns.n_s}, {"per_state_degrees", std::move(degrees)}};
}

inline Json residuals_to_json(const ConditionResiduals& r)
{
    Json pairs = Json::array();
    for (const auto& p : r.pairs) {
        Json row = {{"i", p.first.name()}, {"j", p.second.name()}, {"residual_top", p.top}};
        row["residual_top_minus_one"] = p.top_minus_one ? Json(*p.top_minus_one) : Json(nullptr);
        pairs.push_back(std::move(row));
    }
    return {{"n_s", r.n_s}, {"degenerate", r.degenerate}, {"pairs", std::move(pairs)}};
}

inline Json certificate_to_json(const C0Certificate& c)
{
    Json c0 = Json::array();
    for (Eigen::Index k = 0; k < 6; ++k) {
        c0.push_back(complex_json(c.best_c0(k)));
    }
    return {{"i0", c.i0.name()},
            {"restarts", c.restarts},
            {"seed", c.seed},
            {"floor_threshold", c.floor_threshold},
            {"residual_at_unit_norm", c.residual_at_unit_norm},
            {"best_c0", std::move(c0)},
            {"evaluations", c.evaluations},
            {"passed", c.passed()}};
}

inline Json aux_summary_to_json(const AuxTrialSummary& s)
{
    return {{"trials", s.trials},
            {"max_deviation", s.max_deviation},
            {"max_deviation_top", s.max_deviation_top},
            {"max_deviation_second", s.max_deviation_second},
            {"max_deviation_fit", s.max_deviation_fit},
            {"max_deviation_cross_terms", s.max_deviation_cross_terms},
            {"trials_with_ns_zero", s.second_skipped}};
}

inline Json trace_record_to_json(const TraceRecord& t)
{
    return {{"level", t.level},           {"restart", t.restart},         {"seed", t.seed},
            {"iterations", t.iterations}, {"evaluations", t.evaluations}, {"best_value", t.best_value}};
}

}  // namespace domino::io
