# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT
