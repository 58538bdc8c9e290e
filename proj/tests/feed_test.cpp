#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "polmine/feed.hpp"
#include "polmine/markup.hpp"

using namespace polmine;
using feed::FeedSource;

namespace {

FeedSource politique() { return {"https://www.agoravox.fr", 31, "Política francesa"}; }

std::string item(const std::string& title, const std::string& link, const std::string& guid,
                 const std::string& date = "2024-06-26T10:00:00Z") {
  std::string s = "<item><title>" + title + "</title>";
  if (!link.empty()) s += "<link>" + link + "</link>";
  if (!guid.empty()) s += "<guid>" + guid + "</guid>";
  if (!date.empty()) s += "<dc:date>" + date + "</dc:date>";
  return s + "<description>d</description></item>";
}

std::string channel(const std::string& items) {
  return R"(<?xml version="1.0" encoding="utf-8"?><rss version="2.0" xmlns:dc="http://purl.org/dc/elements/1.1/"><channel><title>c</title>)" +
         items + "</channel></rss>";
}

}  // namespace

TEST(FeedUrl, BuildsBackendAddress) {
  EXPECT_EQ(feed::build_feed_url(politique()), "https://www.agoravox.fr/spip.php?page=backend&id_rubrique=31");
  EXPECT_EQ(feed::build_feed_url({"https://example.org", 1, "x"}),
            "https://example.org/spip.php?page=backend&id_rubrique=1");
}

TEST(FeedUrl, RejectsInvalidSources) {
  EXPECT_THROW(feed::build_feed_url({"not-a-url", 31, "x"}), ValidationError);
  EXPECT_THROW(feed::build_feed_url({"https://example.org", 0, "x"}), ValidationError);
}

TEST(FeedUrl, InjectiveOverRubrique) {
  std::set<std::string> urls;
  for (int id = 1; id <= 500; ++id) urls.insert(feed::build_feed_url({"https://example.org", id, "x"}));
  EXPECT_EQ(urls.size(), 500u);
}

TEST(ParseFeed, PolitiqueFixture) {
  auto r = feed::parse_feed(oracle::slurp(oracle::fixture("feed_politique.xml")), politique());
  ASSERT_EQ(r.items.size(), 2u);
  EXPECT_TRUE(r.warnings.empty());
  const auto& a = r.items[0];
  EXPECT_EQ(a.title, "Manifeste pour la Nouvelle Gauche (Considérations militantes)");
  EXPECT_EQ(a.author, "Alain Malcolm");
  ASSERT_TRUE(a.published_at);
  EXPECT_EQ(format_iso_utc(*a.published_at), "2024-06-26T16:48:16Z");
  EXPECT_EQ(a.language, "fr");
  EXPECT_TRUE(a.guid_is_permalink);
  EXPECT_EQ(a.category_url, "https://www.agoravox.fr/actualites/politique/");
  EXPECT_NE(a.description.find("d'Alain de Benoist"), std::string::npos);
  EXPECT_EQ(a.description.find('<'), std::string::npos);

  const auto& b = r.items[1];
  EXPECT_EQ(b.title, "Législatives 2024 (10) : il était une fois Jordan Bardella, Gabriel Attal et Manuel Bompard");
  EXPECT_EQ(b.author, "Sylvain Rakotoarison");
  ASSERT_TRUE(b.published_at);
  EXPECT_EQ(format_iso_utc(*b.published_at), "2024-06-26T16:10:26Z");
  EXPECT_EQ(b.language, "fr");
  EXPECT_NE(b.description.find("règle d'or"), std::string::npos);
}

TEST(ParseFeed, EmptyChannel) {
  auto r = feed::parse_feed(channel(""), politique());
  EXPECT_TRUE(r.items.empty());
  EXPECT_TRUE(r.warnings.empty());
}

TEST(ParseFeed, ItemWithoutGuidIsSkippedWithWarning) {
  std::string items;
  for (int i = 0; i < 5; ++i) {
    std::string link = "https://example.org/a" + std::to_string(i);
    items += item("t" + std::to_string(i), link, i == 2 ? "" : link);
  }
  auto r = feed::parse_feed(channel(items), politique());
  ASSERT_EQ(r.items.size(), 4u);
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.items[2].title, "t3");
}

TEST(ParseFeed, UnknownDateFormatIsAbsentWithWarning) {
  auto r = feed::parse_feed(channel(item("t", "https://e.org/x", "g", "Wed, 26 Jun 2024 16:48:16 GMT")), politique());
  ASSERT_EQ(r.items.size(), 1u);
  EXPECT_FALSE(r.items[0].published_at);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(ParseFeed, MissingOptionalFieldsStillEmitted) {
  auto r = feed::parse_feed(channel(item("t", "https://e.org/x", "g", "")), politique());
  ASSERT_EQ(r.items.size(), 1u);
  EXPECT_FALSE(r.items[0].published_at);
  EXPECT_FALSE(r.items[0].author);
}

TEST(ParseFeed, MalformedXmlNamesByteOffset) {
  std::string doc = channel(item("t", "https://e.org/x", "g"));
  doc.resize(doc.size() - 10);
  try {
    feed::parse_feed(doc, politique());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(e.offset(), ParseError::npos);
  }
}

// Generated feeds: every emitted item satisfies the item invariants, order
// follows the document and parsing is deterministic.
TEST(ParseFeedProperty, GeneratedFeedsKeepInvariantsAndOrder) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> n_items(0, 8), coin(0, 3);
  for (int round = 0; round < 200; ++round) {
    std::string items;
    std::vector<std::string> expected_titles;
    for (int i = 0, n = n_items(rng); i < n; ++i) {
      std::string title = "item " + std::to_string(i) + " &amp; &#39;x&#39;";
      std::string link = coin(rng) == 0 ? "" : "https://example.org/a/" + std::to_string(i);
      std::string guid = coin(rng) == 0 ? "" : "g" + std::to_string(i);
      std::string date = coin(rng) == 0 ? "garbage" : "2024-06-2" + std::to_string(i % 8) + "T10:00:00Z";
      std::string desc = "<description>&lt;p&gt;texte &lt;a href=\"https://x.org/\"&gt;lien&lt;/a&gt;&lt;/p&gt;</description>";
      items += "<item><title>" + title + "</title>" + (link.empty() ? "" : "<link>" + link + "</link>") +
               (guid.empty() ? "" : "<guid>" + guid + "</guid>") + "<dc:date>" + date + "</dc:date>" + desc + "</item>";
      if (!link.empty() && !guid.empty()) expected_titles.push_back("item " + std::to_string(i) + " & 'x'");
    }
    auto doc = channel(items);
    auto r = feed::parse_feed(doc, politique());
    ASSERT_EQ(r.items.size(), expected_titles.size());
    for (std::size_t i = 0; i < r.items.size(); ++i) {
      const auto& it = r.items[i];
      EXPECT_EQ(it.title, expected_titles[i]);
      EXPECT_TRUE(is_absolute_url(it.link));
      EXPECT_FALSE(it.guid.empty());
      EXPECT_EQ(it.description.find('<'), std::string::npos);
      EXPECT_EQ(it.description, "texte lien");
      if (it.published_at) EXPECT_TRUE(parse_iso_utc(format_iso_utc(*it.published_at)));
    }
    EXPECT_EQ(feed::parse_feed(doc, politique()).items, r.items);
  }
}
