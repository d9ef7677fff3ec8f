"""Input document parsing for models, profiles and experiments"""

from .model_parser import ModelParser, ParsedDocument, force_field_from_dict, profile_from_dict

__all__ = ["ModelParser", "ParsedDocument", "force_field_from_dict", "profile_from_dict"]
