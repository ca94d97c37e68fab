#!/usr/bin/env python3
"""
Localization manager for MultiCoint.
Report headings, caveats and CLI messages in English and French.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Optional

logger = logging.getLogger(__name__)

SUPPORTED_LANGUAGES = ('en', 'fr')


class LocalizationManager:
    """
    Manages report and message localization.
    """

    def __init__(self, locales_dir: Optional[Path] = None, language: str = 'en'):
        """
        Initialize localization manager

        Args:
            locales_dir: Directory holding <lang>.json catalogs
            language: Initial language code
        """
        self.current_language = 'en'
        self.translations: Dict[str, Dict[str, str]] = {}
        self.locales_dir = Path(locales_dir) if locales_dir else Path(__file__).parent.parent / 'locales'
        self.load_translations()
        self.set_language(language)

    def load_translations(self) -> None:
        """
        Load the <lang>.json catalogs; an unreadable one leaves that language empty
        """
        for language in SUPPORTED_LANGUAGES:
            path = self.locales_dir / f'{language}.json'
            catalog: Dict[str, str] = {}
            try:
                with open(path, 'r', encoding='utf-8') as f:
                    catalog = json.load(f)
            except (OSError, json.JSONDecodeError) as e:
                logger.warning("Error loading translations from %s: %s", path, e)
            self.translations[language] = catalog

    def set_language(self, language: str) -> None:
        """
        Set the current language.

        Args:
            language: Language code ('en' or 'fr')
        """
        if language in self.translations:
            self.current_language = language
        else:
            logger.warning("Language '%s' not supported. Using English.", language)
            self.current_language = 'en'

    def get_language(self) -> str:
        return self.current_language

    def translate(self, key: str, **kwargs) -> str:
        """
        Get translated text for the given key.

        Args:
            key: Translation key
            **kwargs: Format parameters for the translation

        Returns:
            Translated text, the English text when missing, or the key itself
        """
        translation = self.translations[self.current_language].get(key)
        if translation is None:
            translation = self.translations['en'].get(key, key)
        if kwargs:
            try:
                return translation.format(**kwargs)
            except (KeyError, IndexError, ValueError) as e:
                logger.warning("Error formatting key '%s': %s", key, e)
        return translation


# Global localization manager instance
_localization_manager = None


def get_localization_manager() -> LocalizationManager:
    """
    Get the global localization manager instance.

    Returns:
        LocalizationManager instance
    """
    global _localization_manager
    if _localization_manager is None:
        _localization_manager = LocalizationManager()
    return _localization_manager


def translate(key: str, **kwargs) -> str:
    """
    Convenience function to translate a key.
    """
    return get_localization_manager().translate(key, **kwargs)


def set_language(language: str) -> None:
    """
    Convenience function to set the language.
    """
    get_localization_manager().set_language(language)


def get_language() -> str:
    return get_localization_manager().get_language()
