#pragma once

#include <string>
#include <string_view>

#include "skg/core/types.hpp"
#include "skg/parsers/source_template.hpp"

namespace skg::parsers {

/// Template whose source_id equals doc.source_id, else the generic fallback.
const SourceTemplate& detect_source(const ReportDoc& doc, const TemplateSet& templates);

/// Converts one report into a CtiRecord using the structure the template
/// describes. Pure: equal inputs give equal records. A title selector that
/// matches nothing does not drop the report; the record goes on with
/// body-only extraction and a TemplateMismatch log entry.
CtiRecord parse(const ReportDoc& doc, const SourceTemplate& tmpl);

/// Visible text of one payload, routed by content type. Used by checkers.
std::string payload_text(const Payload& payload);

/// Text shown by a PDF's content streams (Tj/TJ operators, Flate-decoded
/// streams inflated). No layout analysis.
std::string pdf_text(std::string_view bytes);

}  // namespace skg::parsers
