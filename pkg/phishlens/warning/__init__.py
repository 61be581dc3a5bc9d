from .validate import validate_warning, MAX_WORDS
from .render import build_payload, render_payload, render_warning, FORMATS
