from .lexicons import EntityTypeLexicon, SynonymLexicon, build_synonym_lexicon, coarse_pos
from .views import (
    EXCLUDED_POS,
    PosTagger,
    context_debiased_view,
    entity_debiased_view,
    generate_tri_view,
    generate_tri_views,
    instance_rng,
    main_view,
    read_tri_views,
    write_tri_views,
)
