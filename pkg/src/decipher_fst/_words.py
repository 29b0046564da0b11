"""Vocabulary for the built-in text generator.

Common English words, lowercase a-z only; all 26 letters are covered so
the synthetic tasks exercise the full grapheme set.
"""

WORDS = (
    "the", "of", "and", "to", "in", "is", "was", "that", "for", "it",
    "with", "as", "his", "on", "be", "at", "by", "had", "not", "are",
    "but", "from", "or", "have", "an", "they", "which", "one", "you",
    "were", "her", "all", "she", "there", "would", "their", "we", "him",
    "been", "has", "when", "who", "will", "more", "no", "if", "out",
    "so", "said", "what", "up", "its", "about", "into", "than", "them",
    "can", "only", "other", "new", "some", "could", "time", "these",
    "two", "may", "then", "do", "first", "any", "my", "now", "such",
    "like", "our", "over", "man", "me", "even", "most", "made", "after",
    "also", "did", "many", "before", "must", "through", "back", "years",
    "where", "much", "your", "way", "well", "down", "should", "because",
    "each", "just", "those", "people", "how", "too", "little", "state",
    "good", "very", "make", "world", "still", "own", "see", "men",
    "work", "long", "get", "here", "between", "both", "life", "being",
    "under", "never", "day", "same", "another", "know", "while", "last",
    "might", "us", "great", "old", "year", "off", "come", "since",
    "against", "go", "came", "right", "used", "take", "three", "house",
    "himself", "few", "home", "use", "again", "water", "around", "small",
    "however", "found", "thought", "went", "say", "part", "once",
    "high", "general", "upon", "school", "every", "don", "does", "got",
    "united", "left", "number", "course", "war", "until", "always",
    "away", "something", "fact", "though", "less", "hand", "enough",
    "far", "look", "head", "yet", "government", "system", "better",
    "set", "told", "nothing", "night", "end", "why", "called", "didn",
    "eyes", "find", "going", "look", "asked", "later", "knew", "point",
    "next", "city", "business", "give", "group", "toward", "young",
    "days", "let", "room", "within", "children", "side", "social",
    "given", "order", "often", "early", "public", "sure", "thing",
    "seen", "almost", "hands", "show", "four", "possible", "large",
    "further", "felt", "along", "turned", "interest", "face", "case",
    "among", "mind", "quite", "took", "best", "rather", "big", "open",
    "power", "others", "problem", "help", "put", "place", "second",
    "during", "area", "light", "whole", "country", "service", "real",
    "keep", "name", "hard", "line", "certain", "door", "french",
    "different", "white", "local", "example", "form", "feet", "across",
    "question", "period", "body", "itself", "word", "car", "least",
    "important", "several", "having", "move", "south", "together",
    "program", "true", "money", "making", "church", "family", "free",
    "development", "information", "need", "close", "already", "music",
    "road", "level", "kind", "matter", "near", "west", "north", "means",
    "plan", "street", "member", "action", "things", "course", "above",
    "short", "seems", "table", "major", "human", "century", "study",
    "field", "book", "idea", "five", "woman", "ago", "morning", "air",
    "john", "tell", "paper", "become", "cost", "party", "army",
    "run", "press", "nature", "value", "game", "trade", "ground",
    "percent", "space", "front", "anything", "else", "taken", "makes",
    "leave", "police", "full", "control", "century", "born", "town",
    "coming", "east", "washington", "result", "care", "result",
    "report", "department", "secret", "expected", "girl", "outside",
    "common", "married", "best", "committee", "began", "moment",
    "summer", "english", "class", "usually", "red", "included", "wife",
    "various", "gave", "force", "economic", "blue", "heart", "board",
    "land", "wanted", "position", "black", "available", "today",
    "considered", "beyond", "son", "father", "mother", "brother",
    "miles", "probably", "national", "green", "college", "society",
    "evidence", "president", "situation", "special", "difficult",
    "market", "story", "experience", "voice", "playing", "minutes",
    "love", "personal", "sense", "pay", "support", "tax", "process",
    "training", "strong", "working", "live", "stage", "america",
    "election", "industry", "total", "cut", "past", "type", "words",
    "clear", "private", "feel", "hundred", "single", "except",
    "behind", "sometimes", "deal", "letter", "age", "answer", "stood",
    "basis", "piece", "low", "picture", "paid", "third", "six", "hope",
    "spring", "seemed", "future", "points", "forces", "ten", "top",
    "late", "read", "provide", "modern", "believe", "military", "plant",
    "cold", "food", "equipment", "increase", "particular", "reason",
    "really", "could", "longer", "view", "rate", "center", "peace",
    "lost", "miss", "bring", "office", "hour", "amount", "brought",
    "whether", "dark", "history", "followed", "court", "cases",
    "effect", "moved", "cannot", "similar", "developed", "simple",
    "lines", "merely", "research", "pressure", "systems", "union",
    "figure", "nations", "complete", "surface", "normal", "start",
    "range", "including", "wall", "floor", "mass", "continued",
    "jazz", "jury", "judge", "join", "joy", "journey", "job", "joke",
    "justice", "jump", "junior", "objective", "subject", "project",
    "quick", "quiet", "quality", "quarter", "queen", "quit",
    "question", "frequency", "square", "request", "required",
    "box", "six", "taxi", "text", "exactly", "example", "expect",
    "express", "extra", "next", "mixed", "maximum", "complex", "fix",
    "oxygen", "index", "exercise", "existence", "experiment",
    "zero", "zone", "size", "prize", "dozen", "citizen", "crazy",
    "lazy", "organize", "realize", "seized", "frozen", "puzzle",
    "magazine", "horizon", "recognize", "amazing",
    "very", "victory", "village", "visit", "voice", "volume", "seven",
    "given", "never", "government", "heavy", "river", "over", "every",
    "kept", "kitchen", "key", "kill", "killed", "kinds", "knife",
    "knowledge", "known", "weekend", "walked", "walk", "watch",
    "watched", "window", "winter", "wish", "wood", "worked",
)
