#include <doctest.h>

#include "skg/nlp/extractor.hpp"
#include "skg/nlp/ioc.hpp"
#include "skg/nlp/ner_eval.hpp"
#include "skg/nlp/relations.hpp"
#include "skg/nlp/tokenizer.hpp"
#include "support.hpp"

using namespace skg;
using namespace skg::nlp;

namespace {

EntityMention mention(const std::string& text, const std::string& surface, EntityType t) {
  auto pos = text.find(surface);
  REQUIRE(pos != std::string::npos);
  return {surface, CharSpan{pos, pos + surface.size()}, std::nullopt, t, 1.0, Provenance::Crf};
}

}  // namespace

TEST_CASE("verb lexicon generates regular inflections") {
  auto lex = VerbLexicon::builtin();
  CHECK(lex.lemma_of("uses") == std::optional<std::string>("use"));
  CHECK(lex.lemma_of("used") == std::optional<std::string>("use"));
  CHECK(lex.lemma_of("using") == std::optional<std::string>("use"));
  CHECK(lex.lemma_of("dropped") == std::optional<std::string>("drop"));
  CHECK(lex.lemma_of("Deploys") == std::optional<std::string>("deploy"));
  CHECK(lex.lemma_of("targeted") == std::optional<std::string>("target"));
  CHECK_FALSE(lex.lemma_of("walked").has_value());
  lex.add("copy");
  CHECK(lex.lemma_of("copies") == std::optional<std::string>("copy"));
  CHECK(lex.lemma_of("copied") == std::optional<std::string>("copy"));
}

TEST_CASE("lexicon file lists irregular forms") {
  test::TempDir dir;
  test::write_file(dir / "verbs.txt", "# comment\nsteal stole stolen\nsend sent\n");
  auto lex = VerbLexicon::load(dir / "verbs.txt");
  CHECK(lex.size() == 2);
  CHECK(lex.lemma_of("stole") == std::optional<std::string>("steal"));
  CHECK(lex.lemma_of("steals") == std::optional<std::string>("steal"));
  CHECK(lex.lemma_of("sent") == std::optional<std::string>("send"));
}

TEST_CASE("relation labels") {
  CHECK(relation_label("use") == "USE");
  CHECK(relation_label("command-and-control") == "COMMAND_AND_CONTROL");
}

TEST_CASE("consecutive entities linked by a verb") {
  const std::string text = "APT41 used Mimikatz for credential dumping.";
  auto ts = tokenize(protect_iocs(text));
  std::vector<EntityMention> es{mention(text, "APT41", EntityType::ThreatActor),
                                mention(text, "Mimikatz", EntityType::Tool),
                                mention(text, "credential dumping", EntityType::Technique)};
  auto rs = extract_relations(ts, es, VerbLexicon::builtin());
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].head == 0);
  CHECK(rs[0].tail == 1);
  CHECK(rs[0].verb == "USE");
  CHECK(rs[0].evidence_span.start <= 0);
  CHECK(rs[0].evidence_span.end >= 19);
}

TEST_CASE("passive voice swaps head and tail") {
  const std::string text = "Mimikatz was used by FIN7 to dump credentials.";
  auto ts = tokenize(protect_iocs(text));
  std::vector<EntityMention> es{mention(text, "Mimikatz", EntityType::Tool),
                                mention(text, "FIN7", EntityType::ThreatActor)};
  auto rs = extract_relations(ts, es, VerbLexicon::builtin());
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].head == 1);
  CHECK(rs[0].tail == 0);
  CHECK(rs[0].verb == "USE");
}

TEST_CASE("the verb nearest the first entity wins") {
  const std::string text = "Emotet downloads and then installs TrickBot.";
  auto ts = tokenize(protect_iocs(text));
  std::vector<EntityMention> es{mention(text, "Emotet", EntityType::ReportMalware),
                                mention(text, "TrickBot", EntityType::ReportMalware)};
  auto rs = extract_relations(ts, es, VerbLexicon::builtin());
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].verb == "DOWNLOAD");
}

TEST_CASE("no relation across sentences or without a verb") {
  const std::string text = "APT41 is active. Mimikatz runs. Turla and ComRAT.";
  auto ts = tokenize(protect_iocs(text));
  std::vector<EntityMention> es{mention(text, "APT41", EntityType::ThreatActor),
                                mention(text, "Mimikatz", EntityType::Tool),
                                mention(text, "Turla", EntityType::ThreatActor),
                                mention(text, "ComRAT", EntityType::ReportMalware)};
  CHECK(extract_relations(ts, es, VerbLexicon::builtin()).empty());
}

TEST_CASE("IOC entities take part in relations") {
  const std::string text = "ComRAT contacts 203.0.113.7 hourly.";
  auto ts = tokenize(protect_iocs(text));
  std::vector<EntityMention> es{mention(text, "ComRAT", EntityType::ReportMalware)};
  for (auto& m : extract_iocs_regex(ts)) es.push_back(m);
  auto rs = extract_relations(ts, es, VerbLexicon::builtin());
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].verb == "CONTACT");
  CHECK(es[rs[0].tail].etype == EntityType::IP);
}

TEST_CASE("extract_record combines structured, regex and relations") {
  ExtractorResources res;
  CtiRecord rec;
  rec.report_id = "r";
  rec.body_text = "The loader contacts 198.51.100.9 daily.";
  rec.structured_fields["ioc_table"] = {"evil[.]com"};
  extract_record(rec, res);
  REQUIRE(rec.entities.size() == 2);
  CHECK(rec.entities[0].surface == "evil.com");
  CHECK(rec.entities[1].surface == "198.51.100.9");
  CHECK(rec.relations.empty());
  CHECK_NOTHROW(validate(rec));
}

TEST_CASE("NER evaluation counts exact span and type matches") {
  std::vector<GoldSentence> gold{{"APT41 used Mimikatz.", {{{0, 5}, EntityType::ThreatActor},
                                                            {{11, 19}, EntityType::Tool}}}};
  auto predict = [](const std::string&) {
    return std::vector<EntityMention>{
        {"APT41", CharSpan{0, 5}, std::nullopt, EntityType::ThreatActor, 1.0, Provenance::Crf},
        {"Mimi", CharSpan{11, 15}, std::nullopt, EntityType::Tool, 1.0, Provenance::Crf}};
  };
  auto scores = evaluate_ner(gold, predict);
  CHECK(scores.per_type.at(EntityType::ThreatActor).tp == 1);
  CHECK(scores.per_type.at(EntityType::Tool).fp == 1);
  CHECK(scores.per_type.at(EntityType::Tool).fn == 1);
  auto micro = scores.micro();
  CHECK(micro.precision() == doctest::Approx(0.5));
  CHECK(micro.recall() == doctest::Approx(0.5));
  CHECK(micro.f1() == doctest::Approx(0.5));
}

TEST_CASE("gold loader locates entities by text") {
  test::TempDir dir;
  test::write_file(dir / "g.json",
                   R"({"sentences":[{"text":"Turla uses ComRAT; ComRAT beacons.","entities":[
                       {"text":"Turla","type":"ThreatActor"},{"text":"ComRAT","type":"ReportMalware"},
                       {"text":"ComRAT","type":"ReportMalware"}]}]})");
  auto gold = load_ner_gold(dir / "g.json");
  REQUIRE(gold.size() == 1);
  REQUIRE(gold[0].entities.size() == 3);
  CHECK(gold[0].entities[1].span == CharSpan{11, 17});
  CHECK(gold[0].entities[2].span == CharSpan{19, 25});
}
