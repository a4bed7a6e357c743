from pprint import PrettyPrinter, _recursion  # type: ignore
from typing import List

import numpy as np
from dataclasses import Field, fields, is_dataclass


class DataclassPrettyPrinter(PrettyPrinter):
    """
    PrettyPrinter that lays dataclasses out one field per line, keeps dict insertion order, and prints small numpy
    arrays as nested lists (larger ones as a shape summary).
    """

    MAX_ARRAY_SIZE = 64

    def __init__(self, *args, **kwargs):
        kwargs['width'] = kwargs.get('width', 120)
        super().__init__(*args, **kwargs)

    def _format(self, object, stream, indent, allowance, context, level):
        objid = id(object)
        if objid in context:
            stream.write(_recursion(object))
            self._recursive = True
            self._readable = False
            return

        if isinstance(object, np.ndarray):
            if object.size > self.MAX_ARRAY_SIZE:
                stream.write(f'array(shape={object.shape}, dtype={object.dtype})')
                return
            object = object.tolist()

        rep = self._repr(object, context, level)
        max_width = self._width - indent - allowance
        if len(rep) > max_width:
            if isinstance(object, dict):
                context[objid] = 1
                self._pprint_dict(object, stream, indent, allowance, context, level + 1)
                del context[objid]
                return
            elif is_dataclass(object):
                context[objid] = 1
                self._pprint_dataclass(object, stream, indent, allowance, context, level + 1)
                del context[objid]
                return
            p = self._dispatch.get(type(object).__repr__, None)
            if p is not None:
                context[objid] = 1
                p(self, object, stream, indent, allowance, context, level + 1)
                del context[objid]
                return
        stream.write(rep)

    def _pprint_dict(self, object, stream, indent, allowance, context, level):
        write = stream.write
        write('{')
        if len(object):
            # insertion order carries meaning (config sections), don't sort
            self._format_dict_items(list(object.items()), stream, indent, allowance + 1, context, level)
        write('}')

    def _pprint_dataclass(self, object, stream, indent, allowance, context, level):
        write = stream.write
        write(f'{object.__class__.__qualname__}(')
        object_fields: List[Field] = [f for f in fields(object) if f.repr]
        if object_fields:
            indent += self._indent_per_level
            write('\n' + ' ' * indent)
            last_index = len(object_fields) - 1
            for i, field in enumerate(object_fields):
                write(f'{field.name}=')
                self._format(
                    getattr(object, field.name),
                    stream,
                    indent + len(field.name) + 1,
                    allowance if i == last_index else 1,
                    context,
                    level
                )
                if i != last_index:
                    write(',\n' + ' ' * indent)
            indent -= self._indent_per_level
            write('\n' + ' ' * indent)
        write(')')


def pformat(object, indent=1, width=120, depth=None, *, compact=False) -> str:
    """Format a Python object into a pretty-printed representation."""
    return DataclassPrettyPrinter(indent=indent, width=width, depth=depth, compact=compact).pformat(object)
