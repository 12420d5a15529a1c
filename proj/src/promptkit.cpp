#include "fewshot/promptkit.hpp"

#include "fewshot/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>

namespace fewshot {

using nlohmann::json;

namespace {

constexpr const char* kEntityQuestion = "What is the type of the entity between the # marks?";

bool needs_text_b(TaskFormat f) { return f == TaskFormat::sentence_pair; }

std::size_t mention_count(TaskFormat f) {
    if (f == TaskFormat::relation_classification) return 2;
    if (f == TaskFormat::entity_typing) return 1;
    return 0;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

std::string substr_cp(const std::string& s, std::size_t begin, std::size_t end) {
    const auto b = text::byte_offset(s, begin);
    const auto e = text::byte_offset(s, end);
    return s.substr(b, e - b);
}

/// text_a with mention i wrapped in its marker ('#' first, '*' second).
std::string mark_mentions(const std::string& text, const std::vector<Span>& spans) {
    static constexpr char kMarkers[] = {'#', '*'};
    // (code-point offset, opens, marker); at a shared offset a closing
    // marker goes before an opening one.
    std::vector<std::tuple<std::size_t, bool, char>> inserts;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        inserts.emplace_back(spans[i].start, true, kMarkers[i]);
        inserts.emplace_back(spans[i].end, false, kMarkers[i]);
    }
    std::stable_sort(inserts.begin(), inserts.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    std::string out;
    std::size_t cursor = 0;
    for (const auto& [offset, opens, marker] : inserts) {
        out += substr_cp(text, cursor, offset);
        out.push_back(marker);
        cursor = offset;
    }
    out += substr_cp(text, cursor, text::codepoint_length(text));
    return out;
}

}  // namespace

void PromptTemplate::validate() const {
    const bool wants_b = question_pattern.find("{text_b}") != std::string::npos;
    const bool wants_m1 = question_pattern.find("{mention_1}") != std::string::npos;
    const bool wants_m2 = question_pattern.find("{mention_2}") != std::string::npos;
    if (wants_b && !needs_text_b(task_format)) {
        throw ConfigError("template uses {text_b} but task format " + to_string(task_format) + " has no text_b");
    }
    if (wants_m1 && mention_count(task_format) < 1) {
        throw ConfigError("template uses {mention_1} but task format " + to_string(task_format) + " has no mentions");
    }
    if (wants_m2 && mention_count(task_format) < 2) {
        throw ConfigError("template uses {mention_2} but task format " + to_string(task_format) +
                          " has fewer than two mentions");
    }
    if (field_delimiter.empty()) throw ConfigError("field_delimiter must be nonempty");
}

PromptTemplate default_template(const DatasetSpec& spec) {
    PromptTemplate t;
    t.task_format = spec.task_format;
    t.choice_surface = spec.choice_surface;
    switch (spec.task_format) {
        case TaskFormat::single_text:
        case TaskFormat::document: t.question_pattern = "Topic?"; break;
        case TaskFormat::sentence_pair: t.question_pattern = "{text_a} Is {text_b}?"; break;
        case TaskFormat::relation_classification: t.question_pattern = "{mention_1} to {mention_2}?"; break;
        case TaskFormat::entity_typing: t.question_pattern = kEntityQuestion; break;
    }
    return t;
}

std::vector<Choice> make_choices(const PromptTemplate& tmpl, const std::vector<std::string>& label_set) {
    if (label_set.size() > kMaxChoices) {
        throw ConfigError("episode has " + std::to_string(label_set.size()) + " labels; at most " +
                          std::to_string(kMaxChoices) + " lettered choices are supported");
    }
    std::vector<Choice> choices;
    for (std::size_t i = 0; i < label_set.size(); ++i) {
        const auto it = tmpl.choice_surface.find(label_set[i]);
        choices.push_back({static_cast<char>('A' + i), label_set[i],
                           it == tmpl.choice_surface.end() ? label_set[i] : it->second});
    }
    return choices;
}

std::string render_choices(const std::vector<Choice>& choices) {
    std::string out;
    for (const auto& c : choices) {
        if (!out.empty()) out.push_back(' ');
        out += '(';
        out.push_back(c.letter);
        out += ") ";
        out += c.surface;
    }
    return out;
}

Prompt build_prompt(const PromptTemplate& tmpl, const Episode& episode, const LabeledExample& example) {
    tmpl.validate();
    const std::size_t mentions = mention_count(tmpl.task_format);
    if (needs_text_b(tmpl.task_format) && !example.text_b) {
        throw ValidationError("text_b_missing", "example '" + example.example_id + "' has no text_b",
                              example.example_id);
    }
    if (mentions > 0 && (!example.mention_spans || example.mention_spans->size() != mentions)) {
        throw ValidationError("span_count",
                              "example '" + example.example_id + "' needs " + std::to_string(mentions) +
                                  " mention span(s) for " + to_string(tmpl.task_format),
                              example.example_id);
    }

    Prompt p;
    p.episode_id = episode.episode_id;
    p.example_id = example.example_id;
    p.choices = make_choices(tmpl, episode.label_set);

    std::string question = tmpl.question_pattern;
    question = replace_all(question, "{text_a}", example.text_a);
    if (example.text_b) question = replace_all(question, "{text_b}", *example.text_b);
    if (mentions >= 1) {
        const auto& s = (*example.mention_spans)[0];
        question = replace_all(question, "{mention_1}", substr_cp(example.text_a, s.start, s.end));
    }
    if (mentions >= 2) {
        const auto& s = (*example.mention_spans)[1];
        question = replace_all(question, "{mention_2}", substr_cp(example.text_a, s.start, s.end));
    }

    const std::string sep = " " + tmpl.field_delimiter + " ";
    std::string rendered = question + sep + render_choices(p.choices);
    switch (tmpl.task_format) {
        case TaskFormat::sentence_pair: break;
        case TaskFormat::relation_classification:
        case TaskFormat::entity_typing:
            rendered += sep + mark_mentions(example.text_a, *example.mention_spans);
            break;
        case TaskFormat::single_text:
        case TaskFormat::document: rendered += sep + example.text_a; break;
    }
    p.rendered_text = std::move(rendered);
    return p;
}

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

/// Lowercase, punctuation replaced by spaces, whitespace collapsed.
std::string loose(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : s) {
        if (std::ispunct(c) || std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::vector<std::string> tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : loose(s)) {
        if (c == ' ') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

/// Position of the first whole-word occurrence of `needle` in `hay`.
std::size_t find_word(const std::string& hay, const std::string& needle) {
    if (needle.empty()) return std::string::npos;
    std::size_t pos = hay.find(needle);
    while (pos != std::string::npos) {
        const bool left_ok = pos == 0 || !is_word_char(static_cast<unsigned char>(hay[pos - 1]));
        const std::size_t end = pos + needle.size();
        const bool right_ok = end >= hay.size() || !is_word_char(static_cast<unsigned char>(hay[end]));
        if (left_ok && right_ok) return pos;
        pos = hay.find(needle, pos + 1);
    }
    return std::string::npos;
}

std::optional<std::size_t> leading_letter(std::string_view generated, std::size_t n_choices) {
    const std::string t = text::trim(generated);
    auto to_index = [&](char c) -> std::optional<std::size_t> {
        const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (up < 'A' || up >= static_cast<char>('A' + n_choices)) return std::nullopt;
        return static_cast<std::size_t>(up - 'A');
    };
    if (t.size() >= 3 && t[0] == '(' && t[2] == ')') return to_index(t[1]);
    if (t.size() >= 2 && t[1] == ')') return to_index(t[0]);
    // Bare letter, optionally followed by punctuation only ("B", "B.").
    if (!t.empty() && std::isalpha(static_cast<unsigned char>(t[0]))) {
        bool rest_punct = true;
        for (std::size_t i = 1; i < t.size(); ++i) {
            if (!std::ispunct(static_cast<unsigned char>(t[i]))) rest_punct = false;
        }
        if (rest_punct) return to_index(t[0]);
    }
    return std::nullopt;
}

}  // namespace

std::string normalize_answer(std::string_view generated, const std::vector<Choice>& choices) {
    if (choices.empty()) throw ConfigError("normalize_answer needs at least one choice");
    std::string gen;
    try {
        gen = text::nfc(generated);
    } catch (const Error&) {
        gen = std::string(generated);
    }
    const std::string gen_loose = loose(gen);

    for (const auto& c : choices) {
        if (gen_loose == loose(c.surface) || gen_loose == loose(c.label)) return c.label;
    }
    if (const auto idx = leading_letter(gen, choices.size())) return choices[*idx].label;

    std::size_t best_pos = std::string::npos;
    std::size_t best_len = 0;
    const Choice* best = nullptr;
    for (const auto& c : choices) {
        for (const auto* form : {&c.surface, &c.label}) {
            const std::string needle = loose(*form);
            const std::size_t pos = find_word(gen_loose, needle);
            if (pos == std::string::npos) continue;
            if (pos < best_pos || (pos == best_pos && needle.size() > best_len)) {
                best_pos = pos;
                best_len = needle.size();
                best = &c;
            }
        }
    }
    if (best) return best->label;

    const auto gen_tokens = tokens(gen);
    const std::set<std::string> gen_set(gen_tokens.begin(), gen_tokens.end());
    std::size_t best_overlap = 0;
    const Choice* winner = &choices.front();
    for (const auto& c : choices) {
        std::set<std::string> choice_set;
        for (const auto* form : {&c.surface, &c.label}) {
            for (auto& t : tokens(*form)) choice_set.insert(std::move(t));
        }
        std::size_t overlap = 0;
        for (const auto& t : choice_set) overlap += gen_set.count(t);
        if (overlap > best_overlap) {
            best_overlap = overlap;
            winner = &c;
        }
    }
    return winner->label;
}

namespace {

const Dataset& find_dataset(const std::vector<Dataset>& datasets, const std::string& id) {
    for (const auto& ds : datasets) {
        if (ds.spec.dataset_id == id) return ds;
    }
    throw Error("unknown_dataset", "no dataset loaded for '" + id + "'");
}

std::map<std::string, const LabeledExample*> example_index(const Dataset& ds) {
    std::map<std::string, const LabeledExample*> idx;
    for (const auto& ex : ds.examples) idx[ex.example_id] = &ex;
    return idx;
}

const LabeledExample& lookup(const std::map<std::string, const LabeledExample*>& idx, const std::string& id,
                             const std::string& dataset_id) {
    const auto it = idx.find(id);
    if (it == idx.end()) {
        throw Error("unknown_example", "dataset '" + dataset_id + "' has no example '" + id + "'");
    }
    return *it->second;
}

json prompt_json(const Prompt& p) {
    json choices = json::array();
    for (const auto& c : p.choices) {
        choices.push_back({{"letter", std::string(1, c.letter)}, {"label", c.label}, {"surface", c.surface}});
    }
    return json{{"episode_id", p.episode_id},
                {"example_id", p.example_id},
                {"rendered_text", p.rendered_text},
                {"choices", choices}};
}

}  // namespace

std::vector<Prompt> episode_prompts(const Episode& episode, const Dataset& dataset) {
    const auto tmpl = default_template(dataset.spec);
    const auto idx = example_index(dataset);
    std::vector<Prompt> prompts;
    prompts.reserve(episode.test_example_ids.size());
    for (const auto& id : episode.test_example_ids) {
        prompts.push_back(build_prompt(tmpl, episode, lookup(idx, id, dataset.spec.dataset_id)));
    }
    return prompts;
}

void write_prompt_dump(std::ostream& out, const BenchmarkManifest& manifest, const std::vector<Dataset>& datasets) {
    std::map<std::string, std::map<std::string, const LabeledExample*>> indices;
    for (const auto& e : manifest.episodes) {
        const auto& ds = find_dataset(datasets, e.dataset_id);
        auto& idx = indices[e.dataset_id];
        if (idx.empty()) idx = example_index(ds);
        const auto tmpl = default_template(ds.spec);
        for (const auto& id : e.train_example_ids) {
            const auto& ex = lookup(idx, id, e.dataset_id);
            auto obj = prompt_json(build_prompt(tmpl, e, ex));
            obj["kind"] = "train";
            const auto choices = make_choices(tmpl, e.label_set);
            for (const auto& c : choices) {
                if (c.label == ex.label) obj["answer"] = c.surface;
            }
            obj["label"] = ex.label;
            out << obj.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
        }
        for (const auto& id : e.test_example_ids) {
            auto obj = prompt_json(build_prompt(tmpl, e, lookup(idx, id, e.dataset_id)));
            obj["kind"] = "prompt";
            out << obj.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
        }
    }
}

}  // namespace fewshot
