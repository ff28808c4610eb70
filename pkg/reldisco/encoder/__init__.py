from .backends import EncoderBackend, MaskedLMBackend, backend_from_description, build_backend
from .mock import MockBackend, read_mock_table, write_mock_table
from .prompts import PromptedInput, build_prompt, truncate_prompt
from .representation import RelationRepresentation, encode, encode_tensors, truncate_top_k
