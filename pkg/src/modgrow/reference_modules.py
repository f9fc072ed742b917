"""Executable fixture modules and their independent oracles.

These sources play three roles: canned code-generation responses for replay
runs, seed records for transfer experiments, and subjects of the
fixture-vs-oracle agreement tests. Each FIXTURE_SOURCES entry must load
cleanly in the sandbox; each oracle recomputes the same answer straight from
scene ground truth without touching the sandbox or the backend.
"""

from __future__ import annotations

import statistics

from .dsl import ModuleSignature, parse_signature_block
from .registry import ModuleRecord
from .scene import SceneGraph, box_area, intersect_boxes

CHOOSE_ATTRIBUTE_SOURCE = '''class CHOOSE_ATTRIBUTE():
    """
    Decide which of two candidate attributes describes the object region.
    Input:
        image: an image object
        box: a list of bounding boxes
        object: a string
        attribute1: a string
        attribute2: a string
    Output:
        result: a string
    Examples:
        Question: Is the coat thick or thin?
        BOX0=LOC(image=IMAGE,object='coat')
        ANSWER0=CHOOSE_ATTRIBUTE(image=IMAGE,box=BOX0,object='coat',attribute1='thick',attribute2='thin')
        FINAL_RESULT=RESULT(var=ANSWER0)
    """
    step_name = 'CHOOSE_ATTRIBUTE'

    def __init__(self):
        print(f'Registering {self.step_name} step')

    def expand_box(self,box,img_size,factor=1.5):
        W,H = img_size
        x1,y1,x2,y2 = box
        dw = int(factor*(x2-x1)/2)
        dh = int(factor*(y2-y1)/2)
        cx = int((x1 + x2) / 2)
        cy = int((y1 + y2) / 2)
        x1 = max(0,cx - dw)
        x2 = min(cx + dw,W)
        y1 = max(0,cy - dh)
        y2 = min(cy + dh,H)
        return [x1,y1,x2,y2]

    def predict(self,img,boxes,obj,attr1,attr2):
        if len(boxes) > 0:
            box = boxes[0]
            box = self.expand_box(box, img.size)
            out_img = img.crop(box)
        else:
            out_img = img
        prompt1 = f'Tell me the attributes when the {obj} is {attr1} in one sentence.'
        prompt2 = f'Tell me the attributes when the {obj} is {attr2} in one sentence.'
        obj_desc1 = API.gpt3(prompt1, 'gpt3_general')
        obj_desc2 = API.gpt3(prompt2, 'gpt3_general')
        result1 = API.clip(out_img,obj_desc1)
        result2 = API.clip(out_img,obj_desc2)
        if result1 > result2:
            result = attr1
        else:
            result = attr2
        return result

    def execute(self,img,boxes,obj,attr1,attr2):
        result = self.predict(img,boxes,obj,attr1,attr2)
        return result
'''

COMPARE_COLOR_SOURCE = '''class COMPARE_COLOR():
    """
    Tell whether two object regions have the same or different colors.
    Input:
        image: an image object
        box1: a list of bounding boxes
        box2: a list of bounding boxes
        object1: a string
        object2: a string
        compare_type: a string
    Output:
        result: a string
    """
    step_name = 'COMPARE_COLOR'

    def expand_box(self,box,img_size,factor=1.5):
        W,H = img_size
        x1,y1,x2,y2 = box
        dw = int(factor*(x2-x1)/2)
        dh = int(factor*(y2-y1)/2)
        cx = int((x1 + x2) / 2)
        cy = int((y1 + y2) / 2)
        x1 = max(0,cx - dw)
        x2 = min(cx + dw,W)
        y1 = max(0,cy - dh)
        y2 = min(cy + dh,H)
        return [x1,y1,x2,y2]

    def predict(self,img,boxes1,boxes2,obj1,obj2,compare_type):
        if len(boxes1) > 0:
            box1 = boxes1[0]
            box1 = self.expand_box(box1,img.size)
            out_img1 = img.crop(box1)
        else:
            out_img1 = img
        if len(boxes2) > 0:
            box2 = boxes2[0]
            box2 = self.expand_box(box2,img.size)
            out_img2 = img.crop(box2)
        else:
            out_img2 = img
        color1 = API.vqa(out_img1, f'What color is the {obj1}?')
        color2 = API.vqa(out_img2, f'What color is the {obj2}?')
        prompt = f'Can the {color1} be regarded as the same color as {color2}? You should just reply yes or no without any other words.'
        temp = API.gpt3(prompt, 'gpt3_general')
        if 'same' == compare_type:
            if 'yes' in temp.lower():
                result = 'yes'
            elif 'no' in temp.lower():
                result = 'no'
        elif 'different' == compare_type:
            if 'yes' in temp.lower():
                result = 'no'
            elif 'no' in temp.lower():
                result = 'yes'
        else:
            if 'yes' in temp.lower():
                result = 'yes'
            elif 'no' in temp.lower():
                result = 'no'
        return result

    def execute(self,img,boxes1,boxes2,obj1,obj2,compare_type):
        result = self.predict(img,boxes1,boxes2,obj1,obj2,compare_type)
        return result
'''

# Inverted same/different branches; used to exercise the gate and repair loop.
COMPARE_COLOR_MUTATED_SOURCE = COMPARE_COLOR_SOURCE.replace(
    "if 'same' == compare_type:", "if 'different' == compare_type:", 1
).replace("elif 'different' == compare_type:", "elif 'same' == compare_type:", 1)

SORT_SPATIAL_SOURCE = '''class SORT_SPATIAL():
    """
    Select objects from the image that match the spatial location.
    Objects are represented by the bounding boxes.
    Returns the bounding boxes that satisfy the condition.
    Input:
        image: an image object
        box_list: a list of unormalized bounding boxes
        location: the location can only be left, middle, right, top, bottom, front and behind
        index: a number for the rank of the object
    Output:
        box: a bounding box
    Examples:
        Question: second sandwich from the right on the bottom
        BOXLIST0=LOC(image=IMAGE,object='sandwich')
        BOXLIST1=SORT_SPATIAL(image=IMAGE,box_list=BOXLIST0,location='right',index=2)
        BOXLIST2=SORT_SPATIAL(image=IMAGE,box_list=BOXLIST1,location='bottom',index=1)
        FINAL_RESULT=RESULT(var=BOXLIST2)
    """
    step_name = 'SORT_SPATIAL'

    def predict(self,img,box_list,location,index):
        if index < 0 or index > len(box_list):
            return []
        if index == 0:
            return [box_list[0]]
        if "front" in location or "behind" in location:
            box_depth_list = self.parse_depth(img, box_list)
            box_list_sorted = sorted(box_depth_list, key=lambda x: x[1])
            out_box_list = [box_i[0] for box_i in box_list_sorted]
            if "behind" in location:
                out_box_list.reverse()
            return [out_box_list[index-1]]
        if "left" in location:
            box_list = sorted(box_list, key=lambda x: x[0])
        elif "right" in location:
            box_list = sorted(box_list, key=lambda x: x[2], reverse=True)
        elif "top" in location:
            box_list = sorted(box_list, key=lambda x: x[1])
        elif "bottom" in location:
            box_list = sorted(box_list, key=lambda x: x[3], reverse=True)
        elif "middle" in location:
            w, h = img.size
            box_list = sorted(box_list, key=lambda x: abs((x[0] + x[2]) / 2 - w / 2))
        else:
            return []
        if index > len(box_list):
            return []
        out_box_list = [box_list[index-1]]
        return out_box_list

    def check_location(self,img,box,location):
        w, h = img.size
        x1, y1, x2, y2 = box
        cx = (x1 + x2) / 2
        cy = (y1 + y2) / 2
        if 'left' in location:
            if cx > w / 2:
                return False
        elif 'right' in location:
            if cx < w / 2:
                return False
        if 'top' in location:
            if cy > h / 2:
                return False
        elif 'bottom' in location:
            if cy < h / 2:
                return False
        return True

    def parse_depth(self,img,box_list):
        box_depth_list = []
        depth_map = API.depth(img)
        for box in box_list:
            avg_depth = median(depth_map.region(box))
            box_depth_list.append((box, avg_depth))
        return box_depth_list

    def execute(self,img,box_list,location,index):
        return self.predict(img,box_list,location,index)
'''

COMPARE_ATTRIBUTE_SOURCE = '''class COMPARE_ATTRIBUTE():
    """
    Tell whether two object regions share the named attribute value.
    Input:
        image: an image object
        box1: a list of bounding boxes
        box2: a list of bounding boxes
        object1: a string
        object2: a string
        attribute: a string
        question: a string
    Output:
        result: a string
    Examples:
        Question: Do the towel and the box have a different colors?
        BOX0=LOC(image=IMAGE,object='towel')
        BOX1=LOC(image=IMAGE,object='box')
        ANSWER0=COMPARE_ATTRIBUTE(image=IMAGE,box1=BOX0,box2=BOX1,object1='towel',object2='box',attribute='color',question=QUESTION)
        FINAL_RESULT=RESULT(var=ANSWER0)
    """
    step_name = 'COMPARE_ATTRIBUTE'

    def expand_box(self,box,img_size,factor=1.5):
        W,H = img_size
        x1,y1,x2,y2 = box
        dw = int(factor*(x2-x1)/2)
        dh = int(factor*(y2-y1)/2)
        cx = int((x1 + x2) / 2)
        cy = int((y1 + y2) / 2)
        return [max(0,cx - dw), max(0,cy - dh), min(cx + dw,W), min(cy + dh,H)]

    def crop_first(self,img,boxes):
        if len(boxes) > 0:
            return img.crop(self.expand_box(boxes[0], img.size))
        return img

    def execute(self,img,boxes1,boxes2,obj1,obj2,attribute,question):
        out_img1 = self.crop_first(img, boxes1)
        out_img2 = self.crop_first(img, boxes2)
        value1 = API.vqa(out_img1, f'What {attribute} is the {obj1}?')
        value2 = API.vqa(out_img2, f'What {attribute} is the {obj2}?')
        if attribute == 'color':
            prompt = f'Can the {value1} be regarded as the same color as {value2}? You should just reply yes or no without any other words.'
            temp = API.gpt3(prompt, 'gpt3_general')
            same = 'yes' in temp.lower()
        else:
            same = value1 == value2
        if 'different' in question.lower():
            return 'yes' if not same else 'no'
        return 'yes' if same else 'no'
'''

DETECT_SHAPE_SOURCE = '''class DETECT_SHAPE():
    """
    Read the shape, color and size of the single object in a puzzle panel.
    Input:
        image: an image object or a list of image objects
    Output:
        record: a list of attribute name and value pairs per panel
    Examples:
        ATTRS0=DETECT_SHAPE(image=PANELS)
    """
    step_name = 'DETECT_SHAPE'

    def read_panel(self,img):
        count = API.vqa(img, 'How many objects are in the image?')
        if count == '0':
            return []
        if count != '1':
            raise ValueError('MULTI_OBJECT: expected one centered object, found ' + count)
        record = []
        for key in ['shape', 'color', 'size']:
            record.append([key, API.vqa(img, 'What ' + key + ' is the object?')])
        return record

    def execute(self,image):
        if isinstance(image, list):
            return [self.read_panel(img) for img in image]
        return self.read_panel(image)
'''

SOLVER_SOURCE = '''class SOLVER():
    """
    Pick the candidate completing the three-by-three attribute matrix.
    Input:
        panel_attributes: a list of attribute records for the eight given panels
        candidate_attributes: a list of attribute records for the eight candidates
    Output:
        answer: a number, the one-based index of the best candidate
    Examples:
        ANSWER0=SOLVER(panel_attributes=ATTRS0,candidate_attributes=ATTRS1)
    """
    step_name = 'SOLVER'

    SCALES = {
        'shape': ['triangle', 'square', 'pentagon', 'hexagon', 'circle'],
        'color': ['red', 'orange', 'yellow', 'green', 'blue', 'purple'],
        'size': ['small', 'medium', 'large'],
    }

    def scale_for(self,key):
        for name in self.SCALES:
            if key == name or key.endswith('_' + name):
                return self.SCALES[name]
        return None

    def expected_value(self,rows,key):
        r1 = [rows[0][c].get(key) for c in range(3)]
        r2 = [rows[1][c].get(key) for c in range(3)]
        r3 = [rows[2][c].get(key) for c in range(2)]
        if r1[0] == r1[1] == r1[2] and r2[0] == r2[1] == r2[2] and r3[0] == r3[1]:
            return r3[0]
        scale = self.scale_for(key)
        if scale is not None and all(v in scale for v in r1 + r2 + r3):
            def steps_up(row):
                return (scale.index(row[1]) - scale.index(row[0]) == 1
                        and scale.index(row[2]) - scale.index(row[1]) == 1)
            if steps_up(r1) and steps_up(r2):
                i0, i1 = scale.index(r3[0]), scale.index(r3[1])
                if i1 - i0 == 1 and i1 + 1 < len(scale):
                    return scale[i1 + 1]
        s1 = set(r1)
        if len(s1) == 3 and s1 == set(r2) and len(set(r3)) == 2 and set(r3) < s1:
            rest = s1 - set(r3)
            return sorted(rest)[0]
        return None

    def execute(self,panel_attributes,candidate_attributes):
        rows = [
            [dict(panel_attributes[0]), dict(panel_attributes[1]), dict(panel_attributes[2])],
            [dict(panel_attributes[3]), dict(panel_attributes[4]), dict(panel_attributes[5])],
            [dict(panel_attributes[6]), dict(panel_attributes[7]), {}],
        ]
        keys = []
        for record in panel_attributes:
            for key, value in record:
                if key not in keys:
                    keys.append(key)
        expected = {}
        for key in keys:
            value = self.expected_value(rows, key)
            if value is not None:
                expected[key] = value
        best_index = 0
        best_violations = None
        for i, record in enumerate(candidate_attributes):
            cand = dict(record)
            violations = 0
            for key, value in expected.items():
                if cand.get(key) != value:
                    violations += 1
            if best_violations is None or violations < best_violations:
                best_violations = violations
                best_index = i
        return best_index + 1
'''

INDUCE_WORD_SOURCE = '''class INDUCE_WORD():
    """
    Learn which novel word names each attribute value from example pairs and
    apply the binding to the query image.
    Input:
        examples: a list of image and word pairs
        query: an image object
    Output:
        result: a string
    Examples:
        ANSWER0=INDUCE_WORD(examples=EXAMPLES,query=QUERY)
    """
    step_name = 'INDUCE_WORD'

    KEYS = ['shape', 'color', 'material']

    def read_value(self,img,key):
        return API.vqa(img, 'What ' + key + ' is the object?')

    def execute(self,examples,query):
        for key in self.KEYS:
            value_to_word = {}
            word_to_value = {}
            consistent = True
            for img, word in examples:
                value = self.read_value(img, key)
                if value_to_word.get(value, word) != word:
                    consistent = False
                    break
                if word_to_value.get(word, value) != value:
                    consistent = False
                    break
                value_to_word[value] = word
                word_to_value[word] = value
            if consistent and len(value_to_word) >= 2:
                query_value = self.read_value(query, key)
                if query_value in value_to_word:
                    return value_to_word[query_value]
        return 'unknown'
'''

VERIFY_ATTRIBUTE_SOURCE = '''class VERIFY_ATTRIBUTE():
    """
    Check whether the object region clearly shows the attribute.
    Input:
        image: an image object
        box: a list of bounding boxes
        attribute: a string
        object: a string
        question: a string
    Output:
        flag: True if the region shows the attribute else False
    Examples:
        ANSWER0=VERIFY_ATTRIBUTE(image=IMAGE,box=BOX0,attribute='wooden',object='chair',question=QUESTION)
    """
    step_name = 'VERIFY_ATTRIBUTE'

    def execute(self,img,boxes,attribute,obj,question):
        if len(boxes) > 0:
            x1, y1, x2, y2 = boxes[0]
            w, h = img.size
            dw = int(1.5 * (x2 - x1) / 2)
            dh = int(1.5 * (y2 - y1) / 2)
            cx, cy = int((x1 + x2) / 2), int((y1 + y2) / 2)
            out_img = img.crop([max(0, cx - dw), max(0, cy - dh), min(cx + dw, w), min(cy + dh, h)])
        else:
            out_img = img
        score = API.clip(out_img, f'a {attribute} {obj}')
        return score > 0.5
'''

VERIFY_MATERIAL_SOURCE = '''class VERIFY_MATERIAL():
    """
    Check whether the object in the region is made of the material.
    Input:
        image: an image object
        box: a list of bounding boxes
        material: a string
        object: a string
        question: a string
    Output:
        flag: True if the material matches else False
    Examples:
        Question: Is the knife made of ceramic?
        BOX0=LOC(image=IMAGE,object='knife')
        ANSWER0=VERIFY_MATERIAL(image=IMAGE,box=BOX0,material='ceramic',object='knife',question=QUESTION)
        ANSWER1=EVAL(expr=f"'yes' if {ANSWER0} else 'no'")
        FINAL_RESULT=RESULT(var=ANSWER1)
    """
    step_name = 'VERIFY_MATERIAL'

    def execute(self,img,boxes,material,obj,question):
        if len(boxes) > 0:
            x1, y1, x2, y2 = boxes[0]
            w, h = img.size
            dw = int(1.5 * (x2 - x1) / 2)
            dh = int(1.5 * (y2 - y1) / 2)
            cx, cy = int((x1 + x2) / 2), int((y1 + y2) / 2)
            out_img = img.crop([max(0, cx - dw), max(0, cy - dh), min(cx + dw, w), min(cy + dh, h)])
        else:
            out_img = img
        found = API.vqa(out_img, f'What material is the {obj}?')
        return found.lower() == material.lower()
'''

VERIFY_COLOR_SOURCE = '''class VERIFY_COLOR():
    """
    Check whether the object in the region has the named color.
    Input:
        image: an image object
        box: a list of bounding boxes
        color: a string
        object: a string
        question: a string
    Output:
        flag: True if the color matches else False
    Examples:
        ANSWER0=VERIFY_COLOR(image=IMAGE,box=BOX0,color='black',object='coat',question=QUESTION)
    """
    step_name = 'VERIFY_COLOR'

    def execute(self,img,boxes,color,obj,question):
        if len(boxes) > 0:
            x1, y1, x2, y2 = boxes[0]
            w, h = img.size
            dw = int(1.5 * (x2 - x1) / 2)
            dh = int(1.5 * (y2 - y1) / 2)
            cx, cy = int((x1 + x2) / 2), int((y1 + y2) / 2)
            out_img = img.crop([max(0, cx - dw), max(0, cy - dh), min(cx + dw, w), min(cy + dh, h)])
        else:
            out_img = img
        found = API.vqa(out_img, f'What color is the {obj}?')
        return found.lower() == color.lower()
'''

FIXTURE_SOURCES: dict[str, str] = {
    "CHOOSE_ATTRIBUTE": CHOOSE_ATTRIBUTE_SOURCE,
    "COMPARE_COLOR": COMPARE_COLOR_SOURCE,
    "SORT_SPATIAL": SORT_SPATIAL_SOURCE,
    "COMPARE_ATTRIBUTE": COMPARE_ATTRIBUTE_SOURCE,
    "DETECT_SHAPE": DETECT_SHAPE_SOURCE,
    "SOLVER": SOLVER_SOURCE,
    "INDUCE_WORD": INDUCE_WORD_SOURCE,
    "VERIFY_ATTRIBUTE": VERIFY_ATTRIBUTE_SOURCE,
    "VERIFY_MATERIAL": VERIFY_MATERIAL_SOURCE,
    "VERIFY_COLOR": VERIFY_COLOR_SOURCE,
}


def fixture_signature(name: str) -> ModuleSignature:
    return parse_signature_block(FIXTURE_SOURCES[name])


def fixture_signatures() -> list[ModuleSignature]:
    return [fixture_signature(name) for name in FIXTURE_SOURCES]


def fixture_header(name: str) -> str:
    """The class line plus docstring of a fixture, as a stage-1 proposal header."""
    source = FIXTURE_SOURCES[name]
    close = source.index('"""', source.index('"""') + 3)
    return source[: close + 3]


def fixture_record(name: str, origin_task: str = "fixture", eta: float = 0.8) -> ModuleRecord:
    return ModuleRecord(
        signature=fixture_signature(name),
        source=FIXTURE_SOURCES[name],
        kind="generated",
        origin_task=origin_task,
        pass_rate=1.0,
        eta_at_acceptance=eta,
    )


# ---------------------------------------------------------------------------
# Independent oracles (pure scene-graph procedures, no backend, no sandbox)
# ---------------------------------------------------------------------------


def _largest_named(scene: SceneGraph, name: str):
    matches = [o for o in scene.objects if o.name == name]
    if not matches:
        return None
    return max(matches, key=lambda o: box_area(o.box))


def choose_attribute_oracle(scene: SceneGraph, obj_name: str, attr1: str, attr2: str) -> str:
    obj = _largest_named(scene, obj_name)
    values = set(obj.attributes.values()) if obj else set()
    if attr1 in values and attr2 not in values:
        return attr1
    return attr2  # ties and misses fall to the second attribute


def compare_color_oracle(scene: SceneGraph, obj1: str, obj2: str, compare_type: str) -> str:
    a, b = _largest_named(scene, obj1), _largest_named(scene, obj2)
    same = (
        a is not None
        and b is not None
        and a.attributes.get("color") == b.attributes.get("color")
    )
    if compare_type == "different":
        return "yes" if not same else "no"
    return "yes" if same else "no"


def _depth_at(scene: SceneGraph, x: int, y: int) -> float:
    best = 1.0
    for obj in scene.objects:
        x1, y1, x2, y2 = obj.box
        if x1 <= x < x2 and y1 <= y < y2 and obj.depth < best:
            best = obj.depth
    return best


def median_depth_oracle(scene: SceneGraph, box) -> float:
    values = [
        _depth_at(scene, x, y)
        for y in range(max(0, int(box[1])), min(scene.height, int(box[3])))
        for x in range(max(0, int(box[0])), min(scene.width, int(box[2])))
    ]
    return statistics.median(values) if values else 1.0


def sort_spatial_oracle(scene: SceneGraph, boxes, location: str, index: int):
    boxes = [tuple(b) for b in boxes]
    if index < 0 or index > len(boxes):
        return []
    if index == 0:
        return [list(boxes[0])]
    if "front" in location or "behind" in location:
        ranked = sorted(boxes, key=lambda b: median_depth_oracle(scene, b))
        if "behind" in location:
            ranked.reverse()
    elif "left" in location:
        ranked = sorted(boxes, key=lambda b: b[0])
    elif "right" in location:
        ranked = sorted(boxes, key=lambda b: b[2], reverse=True)
    elif "top" in location:
        ranked = sorted(boxes, key=lambda b: b[1])
    elif "bottom" in location:
        ranked = sorted(boxes, key=lambda b: b[3], reverse=True)
    elif "middle" in location:
        ranked = sorted(boxes, key=lambda b: abs((b[0] + b[2]) / 2 - scene.width / 2))
    else:
        return []
    if index > len(ranked):
        return []
    return [list(ranked[index - 1])]


def detect_shape_oracle(scene: SceneGraph, region=None):
    """Attribute record pairs for the single object inside `region` (default: whole panel)."""
    objs = scene.objects
    if region is not None:
        objs = tuple(o for o in objs if intersect_boxes(o.box, tuple(region)))
    if len(objs) == 0:
        return []
    if len(objs) > 1:
        raise ValueError("MULTI_OBJECT")
    obj = objs[0]
    return [[key, obj.attributes.get(key, "unknown")] for key in ("shape", "color", "size")]


_RULE_SCALES = {
    "shape": ["triangle", "square", "pentagon", "hexagon", "circle"],
    "color": ["red", "orange", "yellow", "green", "blue", "purple"],
    "size": ["small", "medium", "large"],
}


def _scale_for_key(key: str):
    for name, scale in _RULE_SCALES.items():
        if key == name or key.endswith("_" + name):
            return scale
    return None


def solver_violations(panel_records, candidate_record) -> int:
    """Brute force: place the candidate in the empty cell and count attribute
    dimensions left without any coherent full-grid rule.

    This verifies rules over all three completed rows per dimension, a
    different procedure from the induce-then-predict fixture.
    """
    panels = [dict(r) for r in panel_records]
    keys: list[str] = []
    for rec in panels:
        for key in rec:
            if key not in keys:
                keys.append(key)
    cand = dict(candidate_record)
    grid = [
        [panels[0], panels[1], panels[2]],
        [panels[3], panels[4], panels[5]],
        [panels[6], panels[7], cand],
    ]
    bad = 0
    for key in keys:
        rows = [[grid[r][c].get(key) for c in range(3)] for r in range(3)]
        scale = _scale_for_key(key)
        constant = all(row[0] == row[1] == row[2] for row in rows)
        progression = scale is not None and all(
            all(v in scale for v in row)
            and scale.index(row[1]) - scale.index(row[0]) == 1
            and scale.index(row[2]) - scale.index(row[1]) == 1
            for row in rows
        )
        distribute = (
            all(len(set(row)) == 3 for row in rows)
            and set(rows[0]) == set(rows[1]) == set(rows[2])
        )
        if not (constant or progression or distribute):
            bad += 1
    return bad


def solver_oracle(panel_records, candidate_records) -> int:
    scored = [
        (solver_violations(panel_records, c), i) for i, c in enumerate(candidate_records)
    ]
    scored.sort()
    return scored[0][1] + 1


def induce_word_oracle(example_records, query_record) -> str:
    """example_records: (attribute dict, word) pairs; query_record: attribute dict."""
    for key in ("shape", "color", "material"):
        value_to_word: dict[str, str] = {}
        word_to_value: dict[str, str] = {}
        consistent = True
        for attrs, word in example_records:
            value = attrs.get(key, "unknown")
            if value_to_word.get(value, word) != word or word_to_value.get(word, value) != value:
                consistent = False
                break
            value_to_word[value] = word
            word_to_value[word] = value
        if consistent and len(value_to_word) >= 2:
            value = query_record.get(key, "unknown")
            if value in value_to_word:
                return value_to_word[value]
    return "unknown"
