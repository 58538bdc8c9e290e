#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "polmine/corpus.hpp"
#include "polmine/text.hpp"
#include "json.hpp"

using namespace polmine;
using namespace polmine::corpus;
using std::chrono::year;

namespace {

Article macron() {
  Article a;
  a.guid = "https://www.agoravox.fr/actualites/politique/article/macron-il-a-vendu-la-france-aux-255198";
  a.title = "Macron: Il a vendu la France aux Américains";
  a.category_label = "Política francesa";
  a.published_date = year{2024} / 6 / 20;
  a.summary = "\"Il a vendu la France aux Américains\" : révélations sur les réseaux américains.";
  CommentRecord c;
  c.comment_id = a.guid + "#forum6101";
  c.author = "nanobis";
  c.posted_at = LocalMinute{year{2024} / 6 / 21, 9, 12};
  c.star_rating = 2;
  c.vote_count = 7;
  c.body_text = "la paix en Ukraine <maintenant> & toujours";
  a.comments.push_back(c);
  return a;
}

VocabPolicy with_stopwords(std::set<std::string> words, double lo = 0.0, double hi = 1.0) {
  VocabPolicy p;
  p.stopwords = std::move(words);
  p.min_doc_coverage = lo;
  p.max_doc_coverage = hi;
  return p;
}

std::vector<TokenizedText> docs_of(const std::vector<std::vector<std::string>>& token_lists) {
  std::vector<TokenizedText> out;
  for (const auto& t : token_lists) out.push_back({"", t});
  return out;
}

}  // namespace

TEST(Store, DuplicateInsertIsNoOp) {
  CorpusStore s;
  EXPECT_EQ(s.upsert(macron()), UpsertOutcome::stored);
  EXPECT_EQ(s.upsert(macron()), UpsertOutcome::duplicate);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_TRUE(s.revisions().empty());
}

TEST(Store, DistinctGuidsAreBothStored) {
  CorpusStore s;
  auto b = macron();
  b.guid = "https://example.org/other";
  s.upsert(macron());
  s.upsert(b);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_NE(s.find(b.guid), nullptr);
}

TEST(Store, EditedArticleUpdatesWithRevision) {
  CorpusStore s;
  s.upsert(macron());
  auto edited = macron();
  edited.summary = "nouveau résumé";
  EXPECT_EQ(s.upsert(edited), UpsertOutcome::updated);
  EXPECT_EQ(s.size(), 1u);
  ASSERT_EQ(s.revisions().size(), 1u);
  EXPECT_EQ(s.revisions()[0].guid, edited.guid);
  EXPECT_NE(s.revisions()[0].note.find("summary"), std::string::npos);
  EXPECT_EQ(s.find(edited.guid)->summary, "nouveau résumé");
}

TEST(Store, RejectsInvalidArticles) {
  CorpusStore s;
  auto a = macron();
  a.guid.clear();
  EXPECT_THROW(s.upsert(a), ValidationError);
  a = macron();
  a.published_date = year{2024} / 2 / 30;
  EXPECT_THROW(s.upsert(a), ValidationError);
}

TEST(Store, GuidUniquenessAfterRandomInserts) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> guid(0, 9);
  for (int round = 0; round < 50; ++round) {
    CorpusStore s;
    std::set<std::string> seen;
    for (int i = 0; i < 30; ++i) {
      auto a = oracle::random_article(rng, static_cast<std::size_t>(guid(rng)));
      a.guid = "g" + a.guid.substr(0, a.guid.find('?'));
      seen.insert(a.guid);
      s.upsert(a);
    }
    std::set<std::string> stored;
    for (const auto& a : s.articles()) EXPECT_TRUE(stored.insert(a.guid).second);
    EXPECT_EQ(stored, seen);
  }
}

TEST(Store, SaveAndLoad) {
  oracle::TempDir dir;
  CorpusStore s;
  s.upsert(macron());
  s.save(dir.path() / "corpus.xml");
  auto loaded = CorpusStore::load(dir.path() / "corpus.xml");
  ASSERT_EQ(loaded.size(), 1u);
  EXPECT_EQ(loaded.articles()[0], macron());
  EXPECT_EQ(CorpusStore::load(dir.path() / "absent.xml").size(), 0u);
}

TEST(Tokenize, DropsStopwordsKeepsCase) {
  auto t = tokenize_clean("la paix en Ukraine", with_stopwords({"la", "en"}));
  EXPECT_EQ(t.tokens, (std::vector<std::string>{"paix", "Ukraine"}));
  EXPECT_EQ(t.original, "la paix en Ukraine");
}

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(tokenize_clean("", {}).tokens.empty()); }

TEST(Tokenize, ElisionAndPunctuation) {
  auto t = tokenize_clean("défaite de la Russie, défaite de l'Ukraine", with_stopwords({"de", "la", "l"}));
  EXPECT_EQ(t.tokens, (std::vector<std::string>{"défaite", "Russie", "défaite", "Ukraine"}));
}

TEST(Tokenize, StopwordMatchIsCaseInsensitive) {
  auto t = tokenize_clean("La LA la Élysée", with_stopwords({"la", "élysée"}));
  EXPECT_TRUE(t.tokens.empty());
}

TEST(Tokenize, BundledFrenchStopwords) {
  auto words = load_stopwords(oracle::data("stopwords/fr.txt"));
  EXPECT_GT(words.size(), 100u);
  EXPECT_TRUE(words.count("les"));
  EXPECT_FALSE(words.count("paix"));
  for (const auto& w : words) EXPECT_EQ(w.find('#'), std::string::npos);
}

TEST(Prune, HighCoverageTokenDropped) {
  auto r = prune_vocabulary(docs_of({{"x", "a"}, {"x"}, {"x", "b"}, {"x"}, {"x"}}), with_stopwords({}, 0.0, 0.8));
  EXPECT_TRUE(r.dropped_high.count("x"));
  EXPECT_EQ(r.docs[0].tokens, (std::vector<std::string>{"a"}));
}

TEST(Prune, LowCoverageTokenDropped) {
  auto r = prune_vocabulary(docs_of({{"y", "z"}, {"z"}, {"z"}, {"z"}}), with_stopwords({}, 0.5, 1.0));
  EXPECT_TRUE(r.dropped_low.count("y"));
  EXPECT_FALSE(r.dropped_low.count("z"));
}

TEST(Prune, OpenBoundsAreNoOp) {
  auto docs = docs_of({{"a", "b", "a"}, {"c"}, {}});
  auto r = prune_vocabulary(docs, {});
  EXPECT_EQ(r.docs, docs);
  EXPECT_TRUE(r.dropped_low.empty());
  EXPECT_TRUE(r.dropped_high.empty());
}

TEST(Prune, EmptyListIsAnError) { EXPECT_THROW(prune_vocabulary({}, {}), ValidationError); }

TEST(Vocab, PolicyValidation) {
  EXPECT_THROW(with_stopwords({}, 0.6, 0.5).validate(), ValidationError);
  EXPECT_THROW(with_stopwords({}, -0.1, 0.5).validate(), ValidationError);
  EXPECT_THROW(with_stopwords({}, 0.0, 1.5).validate(), ValidationError);
}

// Tokenizer against the code-point oracle over fixed phrases and generated
// text.
TEST(TokenizeProperty, AgreesWithOracle) {
  auto stop = load_stopwords(oracle::data("stopwords/fr.txt"));
  VocabPolicy policy = with_stopwords(stop);
  std::vector<std::string> texts = {"la paix en Ukraine", "défaite de la Russie, défaite de l'Ukraine",
                                    "Macron: Il a vendu la France aux Américains", "L'ÉTAT, c'est moi… 2024 ½"};
  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) texts.push_back(oracle::random_text(rng, 25));
  for (const auto& t : texts) {
    auto got = tokenize_clean(t, policy);
    EXPECT_EQ(got.tokens, oracle::tokenize(t, stop)) << t;
    for (const auto& tok : got.tokens) {
      EXPECT_TRUE(text::is_alnum(tok));
      EXPECT_FALSE(stop.count(oracle::lower(tok)));
    }
  }
}

// Pruning against the brute-force recount on every small fixture.
TEST(PruneProperty, AgreesWithRecount) {
  std::mt19937_64 rng(23);
  const std::vector<std::string> vocab = {"paix", "Paix", "Ukraine", "gauche", "droite", "x", "y"};
  std::uniform_int_distribution<std::size_t> n_docs(1, 10), n_tokens(0, 6), pick(0, vocab.size() - 1);
  const std::vector<double> bounds = {0.0, 0.1, 0.2, 0.25, 1.0 / 3, 0.5, 0.6, 2.0 / 3, 0.8, 0.9, 1.0};
  std::uniform_int_distribution<std::size_t> bound(0, bounds.size() - 1);
  for (int round = 0; round < 500; ++round) {
    std::vector<std::vector<std::string>> lists(n_docs(rng));
    for (auto& l : lists) {
      for (std::size_t k = 0, n = n_tokens(rng); k < n; ++k) l.push_back(vocab[pick(rng)]);
    }
    double lo = bounds[bound(rng)], hi = bounds[bound(rng)];
    if (lo > hi) std::swap(lo, hi);
    auto r = prune_vocabulary(docs_of(lists), with_stopwords({}, lo, hi));
    auto expected = oracle::prune(lists, lo, hi);
    ASSERT_EQ(r.docs.size(), expected.size());
    for (std::size_t d = 0; d < expected.size(); ++d) EXPECT_EQ(r.docs[d].tokens, expected[d]);
    for (const auto& t : r.dropped_low) {
      for (const auto& d : r.docs) EXPECT_EQ(std::count(d.tokens.begin(), d.tokens.end(), t), 0);
    }
  }
}

TEST(CorpusXml, MacronArticleRoundTripsByteStably) {
  std::vector<Article> in = {macron()};
  auto xml = serialize_corpus(in);
  EXPECT_NE(xml.find("<TITULO>Macron: Il a vendu la France aux Américains</TITULO>"), std::string::npos);
  EXPECT_NE(xml.find("<CATEGORIA>Política francesa</CATEGORIA>"), std::string::npos);
  EXPECT_NE(xml.find("<FECHA>2024-06-20</FECHA>"), std::string::npos);
  auto parsed = parse_corpus(xml);
  EXPECT_EQ(parsed, in);
  EXPECT_EQ(serialize_corpus(parsed), xml);
}

TEST(CorpusXml, EmptyCorpus) {
  auto xml = serialize_corpus({});
  EXPECT_EQ(xml.find("<NOTICIA"), std::string::npos);
  EXPECT_TRUE(parse_corpus(xml).empty());
}

TEST(CorpusXml, MissingMandatoryChildNamesArticleIndex) {
  std::vector<Article> in = {macron(), macron()};
  in[1].guid = "g2";
  auto xml = serialize_corpus(in);
  auto second = xml.find("<NOTICIA", xml.find("<NOTICIA") + 1);
  auto fecha = xml.find("<FECHA>", second);
  xml.erase(fecha, xml.find("</FECHA>", fecha) + 8 - fecha);
  try {
    parse_corpus(xml);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("article 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_corpus("<CORPUS><NOTICIA>"), ParseError);
}

TEST(CorpusXml, NormalizationPassThenStable) {
  auto a = macron();
  a.title = "bad \x01 control and \xFF byte";
  std::vector<Article> in = {a};
  auto once = parse_corpus(serialize_corpus(in));
  EXPECT_EQ(once[0].title, "bad  control and \xEF\xBF\xBD byte");
  EXPECT_EQ(serialize_corpus(parse_corpus(serialize_corpus(once))), serialize_corpus(once));
}

TEST(CorpusXmlProperty, RoundTripOverGeneratedCorpora) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> n_articles(0, 5);
  for (int round = 0; round < 250; ++round) {
    std::vector<Article> c;
    for (int i = 0, n = n_articles(rng); i < n; ++i) c.push_back(oracle::random_article(rng, i));
    auto xml = serialize_corpus(c);
    auto parsed = parse_corpus(xml);
    ASSERT_EQ(parsed, c) << xml;
    EXPECT_EQ(serialize_corpus(parsed), xml);
  }
}

TEST(Export, OneRecordPerCommentInCorpusOrder) {
  auto a = macron();
  auto b = macron();
  b.guid = "g2";
  b.comments[0].comment_id = "g2#1";
  b.comments.push_back(b.comments[0]);
  b.comments[1].comment_id = "g2#2";
  std::vector<Article> corpus = {a, b};
  auto lines = text::split(export_records(corpus), '\n');
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_TRUE(lines.back().empty());
  auto first = nlohmann::json::parse(lines[0]);
  EXPECT_EQ(first["comment_id"], a.comments[0].comment_id);
  EXPECT_EQ(first["title"], a.title);
  EXPECT_EQ(nlohmann::json::parse(lines[2])["comment_id"], "g2#2");
}

TEST(Index, DuplicateCommentIdRejected) {
  auto a = macron();
  a.comments.push_back(a.comments[0]);
  std::vector<Article> corpus = {a};
  EXPECT_THROW(index_comments(corpus), ValidationError);
}
