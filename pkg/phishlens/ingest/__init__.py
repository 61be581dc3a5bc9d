from .body import preprocess_body, collapse_whitespace
from .eml import parse_eml, NO_SUBJECT
from .dataset import load_dataset, write_dataset, to_preprocessed
