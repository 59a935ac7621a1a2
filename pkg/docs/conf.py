# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

# -*- coding: utf-8 -*-
#
# aefit documentation build configuration file.

import sys
import os

sys.path.insert(0, os.path.join(os.path.abspath('.'), os.pardir))

import aefit

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinx.ext.intersphinx',
]

intersphinx_mapping = {
    'sympy': ('https://docs.sympy.org/latest', None),
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/reference/', None),
}

nitpick_ignore = [
    ('py:mod', 'aefit'),
    ('py:mod', 'numpy'),
    ('py:mod', 'scipy'),
    ('py:mod', 'sympy'),
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'aefit'
copyright = u'2024, aefit developers'

version = aefit.__version__
release = aefit.__version__

exclude_patterns = ['docs_build']
pygments_style = 'sphinx'

# -- Options for HTML output ----------------------------------------------

html_copy_source = False
htmlhelp_basename = 'aefitdoc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {
}

latex_documents = [
  ('index', 'aefit.tex', u'aefit Documentation',
   u'aefit developers', 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    ('index', 'aefit', u'aefit Documentation',
     [u'aefit developers'], 1)
]

# -- Options for Texinfo output -------------------------------------------

texinfo_documents = [
  ('index', 'aefit', u'aefit Documentation',
   u'aefit developers', 'aefit', 'Estimation of the mean reversion of Gaussian Langevin equations.',
   'Miscellaneous'),
]
