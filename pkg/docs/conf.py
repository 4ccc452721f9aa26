from __future__ import annotations

import os
import sys

# Project root on the path so autodoc imports the domain packages directly
sys.path.insert(0, os.path.abspath(".."))

project = "rtmodel"
author = "rtmodel contributors"

# Read version from environment to avoid importing Django at build time
version = os.getenv("RTMODEL_VERSION", "0.1.0")
release = version

extensions = [
    "myst_parser",
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx_autodoc_typehints",
]

# The domain packages are Django-free; only the command layer needs these
autodoc_mock_imports = ["celery", "django"]
autodoc_default_options = {"members": True, "undoc-members": False}
autodoc_member_order = "bysource"
napoleon_google_docstring = True
napoleon_numpy_docstring = False
typehints_fully_qualified = False

myst_enable_extensions = ["colon_fence", "deflist"]

source_suffix = {".md": "markdown"}

exclude_patterns = ["_build"]

html_theme = "alabaster"
