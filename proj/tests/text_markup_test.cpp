#include <gtest/gtest.h>

#include "polmine/errors.hpp"
#include "polmine/labels.hpp"
#include "polmine/markup.hpp"
#include "polmine/text.hpp"
#include "polmine/timeutil.hpp"
#include "polmine/url.hpp"

using namespace polmine;

TEST(Text, LowercasesAccentedCapitals) {
  EXPECT_EQ(text::to_lower("Élysée ÀÇ"), "élysée àç");
}

TEST(Text, WordRunsSplitOnPunctuationAndElision) {
  EXPECT_EQ(text::word_runs("l'Ukraine, 2024!"), (std::vector<std::string>{"l", "Ukraine", "2024"}));
  EXPECT_TRUE(text::word_runs("  ... ").empty());
}

TEST(Text, CollapseWhitespaceHandlesNoBreakSpace) {
  EXPECT_EQ(text::collapse_whitespace("  a  b \n c  "), "a b c");
}

TEST(Text, TruncateNeverSplitsACodePoint) {
  EXPECT_EQ(text::truncate("éèà", 2), "éè");
  EXPECT_EQ(text::truncate("ab", 5), "ab");
}

TEST(Text, ConvertsLatin1ToUtf8) {
  EXPECT_EQ(text::to_utf8("caf\xE9", "ISO-8859-1"), "café");
  EXPECT_THROW(text::to_utf8("x", "no-such-charset"), ParseError);
}

TEST(Labels, StanceParsingToleratesPrefixAndAccents) {
  EXPECT_EQ(parse_stance("de apoyo"), Stance::apoyo);
  EXPECT_EQ(parse_stance("De crítica"), Stance::critica);
  EXPECT_EQ(parse_stance("de acusacion"), Stance::acusacion);
  EXPECT_EQ(parse_stance("de rechazo"), Stance::rechazo);
  EXPECT_EQ(parse_stance("de admiración"), Stance::admiracion);
  EXPECT_EQ(parse_stance("Pregunta"), Stance::pregunta);
  EXPECT_EQ(parse_stance("INFORMACIÓN"), Stance::informacion);
  EXPECT_FALSE(parse_stance("de humor"));
}

TEST(Labels, PartyParsingAcceptsDisplayNamesAndCodes) {
  for (Party p : kAllParties) {
    EXPECT_EQ(parse_party(display_name(p)), p);
    EXPECT_EQ(parse_party(party_code(p)), p);
  }
  EXPECT_EQ(parse_party("reagrupación nacional"), Party::rn);
  EXPECT_EQ(parse_party("Francia Insumisa"), Party::lfi);
  EXPECT_FALSE(parse_party("Partido Pirata"));
}

TEST(Labels, DisplayNames) {
  EXPECT_EQ(display_name(Party::lrem), "La République En Marche! (LREM)");
  EXPECT_EQ(display_name(Party::indeterminado), "Indeterminado");
  EXPECT_EQ(display_name(Stance::critica), "Crítica");
}

TEST(Time, IsoUtcRoundTrip) {
  auto t = parse_iso_utc("2024-06-26T16:48:16Z");
  ASSERT_TRUE(t);
  EXPECT_EQ(format_iso_utc(*t), "2024-06-26T16:48:16Z");
  EXPECT_TRUE(parse_iso_utc("2024-06-26T16:48:16.250Z"));
  EXPECT_FALSE(parse_iso_utc("2024-06-26 16:48:16"));
  EXPECT_FALSE(parse_iso_utc("Wed, 26 Jun 2024 16:48:16 GMT"));
  EXPECT_FALSE(parse_iso_utc("2024-02-30T00:00:00Z"));
}

TEST(Time, DatesAndLocalMinutes) {
  auto d = parse_date("2024-06-20");
  ASSERT_TRUE(d);
  EXPECT_EQ(format_date(*d), "2024-06-20");
  EXPECT_FALSE(parse_date("2024-13-01"));
  auto m = parse_local_minute("2024-06-26T14:23");
  ASSERT_TRUE(m);
  EXPECT_EQ(m->hour, 14);
  EXPECT_EQ(format_local_minute(*m), "2024-06-26T14:23");
  EXPECT_FALSE(parse_local_minute("2024-06-26T24:00"));
}

TEST(UrlTest, ParsesAndResolves) {
  auto u = Url::parse("HTTPS://WWW.AgoraVox.fr:8443/a/b?x=1#f");
  ASSERT_TRUE(u);
  EXPECT_EQ(u->host, "www.agoravox.fr");
  EXPECT_EQ(u->origin(), "https://www.agoravox.fr:8443");
  auto r = resolve_url(*u, "../c?y=2");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->to_string(), "https://www.agoravox.fr:8443/c?y=2");
  EXPECT_FALSE(Url::parse("not-a-url"));
  EXPECT_FALSE(is_absolute_url("/relative"));
}

TEST(Xml, ParsesNamespacesEntitiesAndCdata) {
  auto root = markup::parse_xml(R"(<?xml version="1.0"?><r xmlns:dc="x"><dc:date a="&lt;1&gt;">t&#39;&amp;<![CDATA[<b>]]></dc:date></r>)");
  const auto* d = root.child("date");
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(*d->attribute("a"), "<1>");
  EXPECT_EQ(d->text_content(), "t'&<b>");
}

TEST(Xml, MalformedInputNamesOffset) {
  try {
    markup::parse_xml("<a><b></a>");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(e.offset(), ParseError::npos);
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
  }
  EXPECT_THROW(markup::parse_xml(""), ParseError);
  EXPECT_THROW(markup::parse_xml("<a>&bogus;</a>"), ParseError);
}

TEST(Xml, EncodingDeclarationIsHonoured) {
  auto root = markup::parse_xml_bytes("<?xml version=\"1.0\" encoding=\"ISO-8859-1\"?><t>\xE9t\xE9</t>");
  EXPECT_EQ(root.text_content(), "été");
}

TEST(Html, LenientParsingAndVisibleText) {
  auto doc = markup::parse_html("<div><p>un<br>deux<script>x()</script></div><p>trois &eacute;<b>gras");
  EXPECT_EQ(markup::inner_text(doc), "un\ndeux\ntrois égras");
  EXPECT_EQ(markup::html_to_text("<a href=\"x\">Politique</a> -"), "Politique -");
}

TEST(Html, RemoveElementsDropsScripts) {
  auto doc = markup::parse_html("<div><script>a</script><style>b</style><p>c</p></div>");
  markup::remove_elements(doc, {"script", "style"});
  EXPECT_EQ(markup::to_html(doc).find("script"), std::string::npos);
  EXPECT_EQ(markup::inner_text(doc), "c");
}
