import logging
from pathlib import Path

from reldisco.errors import LexiconError

logger = logging.getLogger(__name__)

# 품사 대분류 (Penn / UPOS 태그를 WordNet 식 한 글자로)
_PENN_PREFIX = {'N': 'n', 'V': 'v', 'J': 'a', 'R': 'r'}
_UPOS = {'NOUN': 'n', 'VERB': 'v', 'ADJ': 'a', 'ADV': 'r'}


def coarse_pos(tag):
    if tag in _UPOS:
        return _UPOS[tag]
    if tag == 's':  # WordNet 위성 형용사
        return 'a'
    if tag in ('n', 'v', 'a', 'r'):
        return tag
    if tag[:1] in _PENN_PREFIX and tag.isupper():
        return _PENN_PREFIX[tag[0]]
    return tag.lower()


class EntityTypeLexicon:
    """엔티티 surface / kb_id -> 타입 이름 (InstanceOf 결과, 예: City)."""

    def __init__(self, by_kb_id=None, by_surface=None):
        self.by_kb_id = dict(by_kb_id or {})
        self.by_surface = dict(by_surface or {})

    def __len__(self):
        return len(self.by_kb_id) + len(self.by_surface)

    def lookup(self, surface, kb_id=None):
        # 없으면 None, 빈 문자열 타입과 구분된다
        if kb_id is not None and kb_id in self.by_kb_id:
            return self.by_kb_id[kb_id]
        return self.by_surface.get(surface)

    @classmethod
    def load(cls, path):
        by_kb_id, by_surface = {}, {}
        with Path(path).open(encoding='utf-8') as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip('\n')
                if not line:
                    continue
                parts = line.split('\t')
                if len(parts) != 3:
                    raise LexiconError(f'{path}:{lineno}: expected surface<TAB>kb_id<TAB>type_name')
                surface, kb_id, type_name = parts
                if kb_id:
                    by_kb_id[kb_id] = type_name
                if surface:
                    by_surface.setdefault(surface, type_name)
        logger.info('entity lexicon %s: %d kb ids, %d surfaces', path, len(by_kb_id), len(by_surface))
        return cls(by_kb_id, by_surface)

    @staticmethod
    def write(path, rows):
        """rows: (surface, kb_id, type_name)."""
        lines = ['\t'.join((surface, kb_id or '', type_name)) for surface, kb_id, type_name in rows]
        Path(path).write_text('\n'.join(lines) + '\n', encoding='utf-8')


class SynonymLexicon:
    """(단어, 품사) -> 동의어 후보. 후보는 키와 같은 품사."""

    def __init__(self, entries=None):
        self.entries = {}
        for (word, pos), candidates in (entries or {}).items():
            self.add(word, pos, candidates)

    def __len__(self):
        return len(self.entries)

    def add(self, word, pos, candidates):
        key = (word.lower(), coarse_pos(pos))
        merged = list(self.entries.get(key, ()))
        for cand in candidates:
            cand = cand.strip()
            if cand and cand.lower() != key[0] and cand not in merged:
                merged.append(cand)
        if merged:
            self.entries[key] = tuple(merged)

    def candidates(self, word, pos):
        return self.entries.get((word.lower(), coarse_pos(pos)), ())

    @classmethod
    def load(cls, path):
        lexicon = cls()
        with Path(path).open(encoding='utf-8') as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip('\n')
                if not line:
                    continue
                parts = line.split('\t')
                if len(parts) != 3:
                    raise LexiconError(f'{path}:{lineno}: expected word<TAB>pos<TAB>syn1|syn2|...')
                word, pos, synonyms = parts
                lexicon.add(word, pos, synonyms.split('|'))
        logger.info('synonym lexicon %s: %d entries', path, len(lexicon))
        return lexicon

    def write(self, path):
        lines = [f'{word}\t{pos}\t{"|".join(cands)}' for (word, pos), cands in sorted(self.entries.items())]
        Path(path).write_text('\n'.join(lines) + '\n', encoding='utf-8')


def build_synonym_lexicon(word_pos_pairs):
    """WordNet 으로 (단어, 품사) 목록의 동의어 사전을 만든다. nltk 와 wordnet 데이터 필요."""
    from nltk.corpus import wordnet as wn

    wn_pos = {'n': wn.NOUN, 'v': wn.VERB, 'a': wn.ADJ, 'r': wn.ADV}
    lexicon = SynonymLexicon()
    for word, tag in sorted(set(word_pos_pairs)):
        pos = coarse_pos(tag)
        if pos not in wn_pos:
            continue
        synonyms = []
        for synset in wn.synsets(word, pos=wn_pos[pos]):
            for lemma in synset.lemmas():
                synonyms.append(lemma.name().replace('_', ' '))
        lexicon.add(word, pos, synonyms)
    return lexicon
