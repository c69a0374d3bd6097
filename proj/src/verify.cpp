#include "vpr/verify.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "vpr/strings.hpp"

namespace vpr {

namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) {
    return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}';
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

struct Span {
    std::size_t begin;
    std::size_t end;  // exclusive
};

std::vector<Span> sentence_spans(std::string_view text) {
    std::vector<Span> spans;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_terminator(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < text.size() && (is_terminator(text[j]) || is_closer(text[j]))) ++j;
        spans.push_back(Span{start, j});
        while (j < text.size() && is_space(text[j])) ++j;
        start = i = j;
    }
    if (start < text.size() &&
        !trim(text.substr(start, text.size() - start)).empty()) {
        spans.push_back(Span{start, text.size()});
    }
    return spans;
}

}  // namespace

std::vector<Chunk> chunk(std::string_view prompt_text, const ChunkerConfig& config) {
    if (trim(prompt_text).empty()) throw EmptyInputError("chunk: empty prompt text");
    const auto min_words = static_cast<std::size_t>(std::max(1, config.min_words_per_chunk));

    auto spans = sentence_spans(prompt_text);
    auto words_in = [&](const Span& s) {
        return word_count(prompt_text.substr(s.begin, s.end - s.begin));
    };

    std::vector<Span> merged;
    Span current = spans.front();
    for (std::size_t k = 1; k < spans.size(); ++k) {
        if (words_in(current) < min_words) {
            current.end = spans[k].end;  // short: merge with the following sentence
        } else {
            merged.push_back(current);
            current = spans[k];
        }
    }
    if (words_in(current) < min_words && !merged.empty()) {
        merged.back().end = current.end;  // trailing short chunk merges backward
    } else {
        merged.push_back(current);
    }

    std::vector<Chunk> chunks;
    chunks.reserve(merged.size());
    int index = 0;
    for (const Span& s : merged) {
        chunks.push_back(Chunk{trim(prompt_text.substr(s.begin, s.end - s.begin)), index++});
    }
    return chunks;
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dimension() == 0 || u.dimension() != v.dimension()) {
        throw DimensionMismatchError("cosine: dimensions " + std::to_string(u.dimension()) +
                                     " vs " + std::to_string(v.dimension()));
    }
    double dot = 0.0;
    double uu = 0.0;
    double vv = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        dot += u.values[i] * v.values[i];
        uu += u.values[i] * u.values[i];
        vv += v.values[i] * v.values[i];
    }
    if (uu == 0.0 || vv == 0.0) throw ZeroVectorError("cosine: zero vector");
    return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

std::vector<std::vector<double>> SimilarityMatrix::rows() const {
    std::vector<std::vector<double>> out(n_atoms);
    for (std::size_t i = 0; i < n_atoms; ++i) {
        out[i].assign(values.begin() + static_cast<std::ptrdiff_t>(i * n_chunks),
                      values.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_chunks));
    }
    return out;
}

SimilarityMatrix similarity_matrix(const std::vector<EmbeddingVector>& atom_vectors,
                                   const std::vector<EmbeddingVector>& chunk_vectors) {
    SimilarityMatrix matrix;
    matrix.n_atoms = atom_vectors.size();
    matrix.n_chunks = chunk_vectors.size();
    matrix.values.resize(matrix.n_atoms * matrix.n_chunks);
    for (std::size_t i = 0; i < matrix.n_atoms; ++i) {
        for (std::size_t j = 0; j < matrix.n_chunks; ++j) {
            matrix.at(i, j) = cosine_similarity(atom_vectors[i], chunk_vectors[j]);
        }
    }
    return matrix;
}

std::vector<EvidencePair> match_atoms(const std::vector<Atom>& atoms,
                                      const std::vector<Chunk>& chunks,
                                      EmbeddingBackend& backend,
                                      const BackendConfig& config,
                                      SimilarityMatrix* matrix_out) {
    if (atoms.empty()) throw EmptyInputError("match_atoms: no atoms");
    if (chunks.empty()) throw EmptyInputError("match_atoms: no chunks");

    std::vector<std::string> atom_texts;
    atom_texts.reserve(atoms.size());
    for (const Atom& atom : atoms) atom_texts.push_back(atom.text);
    std::vector<std::string> chunk_texts;
    chunk_texts.reserve(chunks.size());
    for (const Chunk& c : chunks) chunk_texts.push_back(c.text);

    const auto atom_vectors = embed(backend, atom_texts, config);
    const auto chunk_vectors = embed(backend, chunk_texts, config);
    SimilarityMatrix matrix = similarity_matrix(atom_vectors, chunk_vectors);

    std::vector<EvidencePair> pairs;
    pairs.reserve(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < chunks.size(); ++j) {
            if (matrix.at(i, j) > matrix.at(i, best)) best = j;  // ties keep the earliest
        }
        pairs.push_back(EvidencePair{atoms[i], chunks[best], matrix.at(i, best)});
    }
    if (matrix_out) *matrix_out = std::move(matrix);
    return pairs;
}

VerificationMetrics compute_metrics(const std::vector<EntailmentJudgment>& judgments) {
    VerificationMetrics metrics;
    metrics.n_atoms = static_cast<int>(judgments.size());
    for (const EntailmentJudgment& judgment : judgments) {
        switch (judgment.label) {
            case EntailmentLabel::ET: ++metrics.n_et; break;
            case EntailmentLabel::MS: ++metrics.n_ms; break;
            case EntailmentLabel::CT: ++metrics.n_ct; break;
        }
    }
    metrics.degenerate = judgments.empty();
    return metrics;
}

bool check_acceptance(const VerificationMetrics& metrics) {
    if (metrics.degenerate) return true;
    return metrics.n_et == metrics.n_atoms && metrics.n_ct == 0;
}

}  // namespace vpr
