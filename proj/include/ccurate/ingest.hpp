#pragma once

#include "ccurate/archive.hpp"
#include "ccurate/document.hpp"
#include "ccurate/markup.hpp"

#include <set>
#include <string>
#include <string_view>

namespace ccurate {

/// Languages retained from the crawl: Afrikaans, German, English, French,
/// West Frisian, Italian, Dutch and Spanish (ISO 639-3).
const std::set<std::string>& crawl_retained_languages();

/// Visible text: script/style/comments and the head are dropped, block
/// boundaries become newlines, whitespace runs inside a line collapse.
std::string extract_text(const NodeTree& tree);

/// Wraps plain text lines in paragraphs; extract_text inverts it.
std::string text_to_markup(std::string_view text);

/// True iff the top-scoring language is in `retained`. Throws ConfigError
/// for an empty set and FormatError when the document has no scores yet.
bool retain_language(const Document& doc, const std::set<std::string>& retained);

/// Builds a raw-stage document from a fetched record: HTML payloads are
/// parsed for visible text and license evidence; plain text passes through.
Document document_from_record(const RawRecord& record, std::string_view collection_id);

} // namespace ccurate
