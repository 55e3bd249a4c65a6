# Configuration file for the Sphinx documentation builder.
#
# This file only contains a selection of the most common options. For a full
# list see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

import os
import sys
from datetime import datetime

# -- Path setup --------------------------------------------------------------

# If extensions (or modules to document with autodoc) are in another directory,
# add these directories to sys.path here. If the directory is relative to the
# documentation root, use os.path.abspath to make it absolute, like shown here.
#

sys.path.insert(0, os.path.abspath("../"))

import lrbounds  # noqa: E402

curdir = os.path.dirname(__file__)
sys.path.append(os.path.abspath(os.path.join(curdir, "..")))
sys.path.append(os.path.abspath(os.path.join(curdir, "..", "lrbounds")))

# -- Project information -----------------------------------------------------

project = "lrbounds"
copyright = f"{datetime.today().year}, lrbounds developers"
author = "lrbounds developers"
version = lrbounds.__version__

# -- General configuration ---------------------------------------------------

# If your documentation needs a minimal Sphinx version, state it here.
#
needs_sphinx = "4.0"

# Add any Sphinx extension module names here, as strings. They can be
# extensions coming with Sphinx (named 'sphinx.ext.*') or your custom
# ones.
extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.doctest",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
    "sphinx_copybutton",
    "numpydoc",
]

# configure sphinx-copybutton
copybutton_prompt_text = r">>> |\.\.\. |\$ "
copybutton_prompt_is_regexp = True

# generate autosummary even if no references
# -- sphinx.ext.autosummary
autosummary_generate = True
autodoc_default_options = {"inherited-members": None}

# -- numpydoc
# Below is needed to prevent errors
numpydoc_xref_param_type = True
numpydoc_class_members_toctree = False
numpydoc_attributes_as_param_list = True
numpydoc_use_blockquotes = True
numpydoc_validate = True

numpydoc_xref_ignore = {
    # words
    "instance",
    "of",
    "default",
    "shape",
    "or",
    "optional",
    "in",
    "dtype",
    "str",
    "to",
    "the",
    "list",
    "dict",
    "sequence",
    # shapes
    "n_times",
    "n_distances",
    # lrbounds
    "Alpha",
    "Site",
    "TimeGrid",
    "LambdaLike",
}
numpydoc_xref_aliases = {
    "ArrayLike": "numpy.ndarray",
    "LinearOperator": "scipy.sparse.linalg.LinearOperator",
    # lrbounds
    "CouplingModel": "lrbounds.lattice.CouplingModel",
    "BoundConstants": "lrbounds.bounds.BoundConstants",
    "MuPolicy": "lrbounds.bounds.MuPolicy",
    "HybridBound": "lrbounds.bounds.HybridBound",
    "VerificationReport": "lrbounds.bounds.VerificationReport",
    "XYScenario": "lrbounds.dynamics.XYScenario",
    "TFIMScenario": "lrbounds.dynamics.TFIMScenario",
    "TFIMResult": "lrbounds.dynamics.TFIMResult",
    "KrylovConfig": "lrbounds.dynamics.KrylovConfig",
    "DenseModelSpec": "lrbounds.dynamics.DenseModelSpec",
    "Dispersion": "lrbounds.dynamics.Dispersion",
    "PowerLawFit": "lrbounds.dynamics.PowerLawFit",
    "ResultGrid": "lrbounds.ResultGrid",
}

default_role = "obj"

# Add any paths that contain templates here, relative to this directory.
templates_path = ["_templates"]

# List of patterns, relative to source directory, that match files and
# directories to ignore when looking for source files.
# This pattern also affects html_static_path and html_extra_path.
exclude_patterns = [
    "_build",
    "Thumbs.db",
    ".DS_Store",
    "**.ipynb_checkpoints",
]

source_suffix = [".rst", ".md"]

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/devdocs", None),
    "scipy": ("https://scipy.github.io/devdocs", None),
    "networkx": ("https://networkx.org/documentation/latest/", None),
}
intersphinx_timeout = 5

# The master toctree document.
master_doc = "index"


# -- Options for HTML output -------------------------------------------------

# The theme to use for HTML and HTML Help pages.  See the documentation for
# a list of builtin themes.
html_theme = "pydata_sphinx_theme"

html_title = f"lrbounds v{version}"

html_theme_options = {
    "use_edit_page_button": False,
    "navigation_with_keys": False,
    "show_toc_level": 1,
}

# Custom sidebar templates, maps document names to template names.
html_sidebars = {
    "index": ["search-field.html"],
}

# Enable nitpicky mode - which ensures that all references in the docs
# resolve.

nitpicky = False
nitpick_ignore = [
    ("py:class", "numpy._typing._array_like._SupportsArray"),
    ("py:class", "numpy._typing._nested_sequence._NestedSequence"),
]
