#include "kidlmforge/lang_detect.hpp"

#include <algorithm>
#include <cmath>

#include "kidlmforge/text.hpp"

namespace kidlm {

namespace {

// Small bundled seed corpora, one per supported language. They only need to
// separate the five profiles, not to model the languages fully.
const char* kSeedEnglish =
    "The children walked to school in the morning and talked about the books "
    "they were reading. Scientists discovered a new kind of frog living near "
    "the river, and the young reporters wrote a story about it for the school "
    "newspaper. Many families visited the museum on the weekend to see the "
    "dinosaur bones. The teacher explained how plants grow from seeds and why "
    "the leaves change color in the autumn. After lunch the students played "
    "football in the yard and then finished their homework before dinner. "
    "The little dog ran across the park chasing a yellow ball while the birds "
    "sang in the tall green trees. Everyone agreed that the trip to the zoo "
    "was the best day of the whole year because they saw elephants and "
    "penguins. She wanted to become an astronaut when she grew up, so she "
    "read every book about space and the planets that she could find in the "
    "library. It was a bright cold day in April and the clocks were striking. "
    "People like stories about animals, friendship, and faraway places.";

const char* kSeedFrench =
    "Les enfants marchaient vers l'école le matin et parlaient des livres "
    "qu'ils lisaient. Les scientifiques ont découvert une nouvelle espèce de "
    "grenouille près de la rivière, et les jeunes journalistes ont écrit un "
    "article pour le journal de l'école. Beaucoup de familles ont visité le "
    "musée pendant le week-end pour voir les os de dinosaures. Le professeur "
    "a expliqué comment les plantes poussent à partir des graines et pourquoi "
    "les feuilles changent de couleur en automne. Après le déjeuner, les "
    "élèves ont joué au football dans la cour, puis ils ont fini leurs "
    "devoirs avant le dîner. Le petit chien courait dans le parc en "
    "poursuivant un ballon jaune pendant que les oiseaux chantaient dans les "
    "grands arbres verts. Tout le monde était d'accord que la sortie au zoo "
    "était la meilleure journée de l'année parce qu'ils ont vu des éléphants "
    "et des pingouins. Elle voulait devenir astronaute, alors elle lisait "
    "tous les livres sur l'espace et les planètes qu'elle pouvait trouver à "
    "la bibliothèque.";

const char* kSeedGerman =
    "Die Kinder gingen morgens zur Schule und sprachen über die Bücher, die "
    "sie gerade lasen. Wissenschaftler entdeckten eine neue Froschart am "
    "Fluss, und die jungen Reporter schrieben einen Artikel für die "
    "Schülerzeitung. Viele Familien besuchten am Wochenende das Museum, um "
    "die Dinosaurierknochen zu sehen. Der Lehrer erklärte, wie Pflanzen aus "
    "Samen wachsen und warum sich die Blätter im Herbst verfärben. Nach dem "
    "Mittagessen spielten die Schüler Fußball auf dem Hof und machten dann "
    "ihre Hausaufgaben vor dem Abendessen. Der kleine Hund lief durch den "
    "Park und jagte einem gelben Ball hinterher, während die Vögel in den "
    "hohen grünen Bäumen sangen. Alle waren sich einig, dass der Ausflug in "
    "den Zoo der beste Tag des ganzen Jahres war, weil sie Elefanten und "
    "Pinguine gesehen haben. Sie wollte Astronautin werden, also las sie "
    "jedes Buch über den Weltraum und die Planeten, das sie in der Bücherei "
    "finden konnte.";

const char* kSeedSpanish =
    "Los niños caminaban a la escuela por la mañana y hablaban de los libros "
    "que estaban leyendo. Los científicos descubrieron una nueva especie de "
    "rana cerca del río, y los jóvenes reporteros escribieron una historia "
    "para el periódico de la escuela. Muchas familias visitaron el museo el "
    "fin de semana para ver los huesos de dinosaurio. La maestra explicó "
    "cómo crecen las plantas a partir de las semillas y por qué las hojas "
    "cambian de color en el otoño. Después del almuerzo los estudiantes "
    "jugaron al fútbol en el patio y luego terminaron su tarea antes de la "
    "cena. El perrito corrió por el parque persiguiendo una pelota amarilla "
    "mientras los pájaros cantaban en los árboles altos y verdes. Todos "
    "estuvieron de acuerdo en que el viaje al zoológico fue el mejor día de "
    "todo el año porque vieron elefantes y pingüinos. Ella quería ser "
    "astronauta, así que leía todos los libros sobre el espacio y los "
    "planetas que podía encontrar en la biblioteca.";

const char* kSeedHindi =
    "बच्चे सुबह स्कूल जाते थे और अपनी किताबों के बारे में बातें करते थे। "
    "वैज्ञानिकों ने नदी के पास मेंढक की एक नई प्रजाति खोजी, और युवा "
    "पत्रकारों ने स्कूल के अखबार के लिए एक कहानी लिखी। कई परिवार सप्ताहांत "
    "में संग्रहालय देखने गए। शिक्षक ने समझाया कि पौधे बीज से कैसे उगते हैं "
    "और पत्तियाँ शरद ऋतु में रंग क्यों बदलती हैं। दोपहर के भोजन के बाद "
    "छात्रों ने मैदान में फुटबॉल खेला और फिर रात के खाने से पहले अपना "
    "गृहकार्य पूरा किया। छोटा कुत्ता पीली गेंद के पीछे पार्क में दौड़ता रहा "
    "जबकि पक्षी ऊँचे हरे पेड़ों पर गाते रहे। सबने माना कि चिड़ियाघर की सैर "
    "साल का सबसे अच्छा दिन था क्योंकि उन्होंने हाथी और पेंगुइन देखे।";

// Letters-only fold: anything that is not a letter becomes a space, runs of
// spaces collapse, and the result is wrapped in single spaces.
std::u32string canonical_codepoints(std::string_view text) {
  std::u32string out;
  out.push_back(U' ');
  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp = utf8_decode(text, i);
    if (cp >= U'A' && cp <= U'Z') cp += 32;
    bool letter = (cp >= U'a' && cp <= U'z') || cp >= 0x00C0;
    if (!letter) {
      if (out.back() != U' ') out.push_back(U' ');
    } else {
      out.push_back(cp);
    }
  }
  if (out.back() != U' ') out.push_back(U' ');
  return out;
}

std::map<std::u32string, std::size_t> trigram_counts(std::string_view text) {
  std::u32string cps = canonical_codepoints(text);
  std::map<std::u32string, std::size_t> counts;
  if (cps.size() < 3) return counts;
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    counts[cps.substr(i, 3)]++;
  }
  return counts;
}

}  // namespace

TrigramLanguageDetector::TrigramLanguageDetector() {
  const std::pair<const char*, const char*> seeds[] = {
      {"en", kSeedEnglish}, {"fr", kSeedFrench}, {"de", kSeedGerman},
      {"es", kSeedSpanish}, {"hi", kSeedHindi}};
  constexpr double kAlpha = 0.5;
  // shared smoothing denominator bucket count: union of seen trigrams
  std::size_t distinct = 0;
  std::vector<std::map<std::u32string, std::size_t>> counts;
  for (const auto& [code, seed] : seeds) {
    counts.push_back(trigram_counts(seed));
    distinct += counts.back().size();
  }
  double buckets = static_cast<double>(distinct) + 1.0;
  for (std::size_t p = 0; p < counts.size(); ++p) {
    Profile prof;
    prof.code = seeds[p].first;
    double total = 0;
    for (const auto& [tri, n] : counts[p]) total += static_cast<double>(n);
    double denom = total + kAlpha * buckets;
    for (const auto& [tri, n] : counts[p]) {
      prof.log_prob[tri] = std::log((static_cast<double>(n) + kAlpha) / denom);
    }
    prof.log_unseen = std::log(kAlpha / denom);
    profiles_.push_back(std::move(prof));
  }
}

std::vector<std::string> TrigramLanguageDetector::languages() const {
  std::vector<std::string> out;
  for (const Profile& p : profiles_) out.push_back(p.code);
  return out;
}

LanguageVerdict TrigramLanguageDetector::detect(std::string_view text) const {
  auto grams = trigram_counts(text);
  if (grams.empty()) return {"und", 0.0};

  std::vector<double> scores;
  scores.reserve(profiles_.size());
  for (const Profile& prof : profiles_) {
    double s = 0;
    for (const auto& [tri, n] : grams) {
      auto it = prof.log_prob.find(tri);
      double lp = it == prof.log_prob.end() ? prof.log_unseen : it->second;
      s += lp * static_cast<double>(n);
    }
    scores.push_back(s);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  // posterior under uniform priors
  double z = 0;
  for (double s : scores) z += std::exp(s - scores[best]);
  double confidence = 1.0 / z;
  return {profiles_[best].code, confidence};
}

}  // namespace kidlm
